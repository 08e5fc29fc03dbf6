"""HTTP interface to the document pipeline.

Endpoints (all JSON unless noted):

* ``GET  /api/health`` -- liveness probe, ``{"status": "ok"}``.
* ``POST /api/templates`` -- upload a template document (JSON body);
  returns its content-addressed id.
* ``GET  /api/templates`` -- list stored template ids.
* ``GET  /api/templates/{template_id}`` -- the stored template JSON.
* ``POST /api/recognize`` -- multipart form with an ``image`` file (PNG)
  and a ``template_id`` field; runs the pipeline and stores the result.
* ``GET  /api/predictions/{prediction_id}`` -- a stored result plus any
  corrections recorded for it.
* ``POST /api/predictions/{prediction_id}/corrections`` -- record a
  human correction ``{"field_id", "corrected_text"}``; corrections are
  append-only (newline-delimited JSON on disk) and never mutate the
  original prediction.

Errors carry ``{"detail": {"stage": ..., "message": ...}}`` so clients
can tell template parsing problems from image decoding or lookup
failures.  Status codes: 400 for malformed requests (schema or payload
violations), 404 for unknown ids, 422 for pipeline failures on
well-formed requests (the stage field names the failing step).
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from fastapi import FastAPI, File, Form, HTTPException, Request, UploadFile
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from invizo.imaging.raster import ImagingError, decode_png_bytes
from invizo.pipeline import PipelineConfig, run_pipeline
from invizo.recognizer.checkpoint import load_checkpoint, read_manifest
from invizo.recognizer.model import LineRecognizer, ModelConfig
from invizo.recognizer.vocab import Vocabulary
from invizo.synthesis.corpus import DEFAULT_CHARSET
from invizo.template import TemplateError, parse_template, serialize_template


def _error(status: int, stage: str, message: str) -> HTTPException:
    return HTTPException(
        status_code=status, detail={"stage": stage, "message": message}
    )


@dataclass
class ServiceContext:
    """Everything the endpoints need: model, vocabulary, storage root."""

    model: LineRecognizer
    vocab: Vocabulary
    config: PipelineConfig = field(default_factory=PipelineConfig)
    data_dir: Path = field(default_factory=lambda: Path(tempfile.mkdtemp()))

    def __post_init__(self) -> None:
        self.data_dir = Path(self.data_dir)
        (self.data_dir / "templates").mkdir(parents=True, exist_ok=True)
        (self.data_dir / "predictions").mkdir(parents=True, exist_ok=True)

    # -- template storage ---------------------------------------------------

    def template_path(self, template_id: str) -> Path:
        return self.data_dir / "templates" / f"{template_id}.json"

    def store_template(self, payload: dict) -> str:
        template = parse_template(payload)  # validation; raises TemplateError
        canonical = serialize_template(template)
        template_id = hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]
        self.template_path(template_id).write_text(canonical, encoding="utf-8")
        return template_id

    def load_template_payload(self, template_id: str) -> dict:
        path = self.template_path(template_id)
        if not path.is_file():
            raise _error(404, "lookup", f"unknown template {template_id!r}")
        return json.loads(path.read_text(encoding="utf-8"))

    def list_templates(self) -> list[str]:
        return sorted(p.stem for p in (self.data_dir / "templates").glob("*.json"))

    # -- prediction storage -------------------------------------------------

    def prediction_path(self, prediction_id: str) -> Path:
        return self.data_dir / "predictions" / f"{prediction_id}.json"

    def store_prediction(self, record: dict) -> None:
        self.prediction_path(record["prediction_id"]).write_text(
            json.dumps(record, sort_keys=True, ensure_ascii=False),
            encoding="utf-8",
        )

    def load_prediction(self, prediction_id: str) -> dict:
        path = self.prediction_path(prediction_id)
        if not path.is_file():
            raise _error(404, "lookup", f"unknown prediction {prediction_id!r}")
        return json.loads(path.read_text(encoding="utf-8"))

    # -- corrections (append-only) ------------------------------------------

    @property
    def corrections_path(self) -> Path:
        return self.data_dir / "corrections.ndjson"

    def append_correction(self, record: dict) -> None:
        with open(self.corrections_path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(record, sort_keys=True, ensure_ascii=False) + "\n")

    def corrections_for(self, prediction_id: str) -> list[dict]:
        if not self.corrections_path.is_file():
            return []
        out = []
        with open(self.corrections_path, "r", encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    record = json.loads(line)
                    if record["prediction_id"] == prediction_id:
                        out.append(record)
        return out


def default_context() -> ServiceContext:
    """Context from the environment.

    ``INVIZO_MODEL`` names a checkpoint to load (its manifest supplies
    the architecture and character inventory); otherwise a freshly
    initialized (untrained) model over the default inventory is used.
    ``INVIZO_DATA_DIR`` fixes the storage root.
    """
    model_path = os.environ.get("INVIZO_MODEL")
    if model_path:
        manifest = read_manifest(model_path)
        meta = manifest.get("meta", {})
        vocab = Vocabulary.from_charset(meta.get("charset", DEFAULT_CHARSET))
        cfg = ModelConfig(**meta.get("model_config", {}))
        model = LineRecognizer(cfg, vocab.size)
        load_checkpoint(model, model_path)
    else:
        vocab = Vocabulary.from_charset(DEFAULT_CHARSET)
        model = LineRecognizer(ModelConfig(), vocab.size)
    model.eval()
    data_dir = os.environ.get("INVIZO_DATA_DIR")
    kwargs = {"data_dir": Path(data_dir)} if data_dir else {}
    return ServiceContext(
        model=model, vocab=vocab, config=PipelineConfig.from_env(), **kwargs
    )


def create_app(context: ServiceContext | None = None) -> FastAPI:
    app = FastAPI(title="invizo", docs_url=None, redoc_url=None)
    ctx = context if context is not None else default_context()
    app.state.context = ctx

    @app.exception_handler(RequestValidationError)
    async def validation_handler(request: Request, exc: RequestValidationError):
        # Malformed request shape is a schema violation (400); 422 is
        # reserved for pipeline-stage failures on well-formed requests.
        return JSONResponse(
            status_code=400,
            content={
                "detail": {
                    "stage": "request-validation",
                    "message": str(exc.errors()),
                }
            },
        )

    @app.get("/api/health")
    def health() -> dict:
        return {"status": "ok"}

    @app.post("/api/templates", status_code=201)
    async def upload_template(request: Request) -> dict:
        try:
            payload = json.loads(await request.body())
        except json.JSONDecodeError as exc:
            raise _error(400, "template-parse", f"invalid JSON: {exc}")
        try:
            template_id = ctx.store_template(payload)
        except TemplateError as exc:
            raise _error(400, "template-parse", str(exc))
        return {"template_id": template_id}

    @app.get("/api/templates")
    def list_templates() -> dict:
        return {"templates": ctx.list_templates()}

    @app.get("/api/templates/{template_id}")
    def get_template(template_id: str) -> dict:
        return ctx.load_template_payload(template_id)

    @app.post("/api/recognize", status_code=201)
    async def recognize_document(
        image: UploadFile = File(...), template_id: str = Form(...)
    ) -> dict:
        payload = ctx.load_template_payload(template_id)
        try:
            template = parse_template(payload)
        except TemplateError as exc:  # stored template no longer parses
            raise _error(400, "template-parse", str(exc))
        blob = await image.read()
        try:
            raster = decode_png_bytes(blob)
        except ImagingError as exc:
            raise _error(422, "image-decode", str(exc))
        try:
            result = run_pipeline(raster, template, ctx.model, ctx.vocab, ctx.config)
        except Exception as exc:
            raise _error(422, "pipeline", str(exc))
        prediction_id = uuid.uuid4().hex[:16]
        record = {
            "prediction_id": prediction_id,
            "template_id": template_id,
            "created_at": datetime.now(timezone.utc).isoformat(),
            "result": result.to_dict(),
        }
        ctx.store_prediction(record)
        return record

    @app.get("/api/predictions/{prediction_id}")
    def get_prediction(prediction_id: str) -> dict:
        record = ctx.load_prediction(prediction_id)
        record["corrections"] = ctx.corrections_for(prediction_id)
        return record

    @app.post("/api/predictions/{prediction_id}/corrections", status_code=201)
    async def add_correction(prediction_id: str, request: Request) -> dict:
        record = ctx.load_prediction(prediction_id)
        try:
            body = json.loads(await request.body())
        except json.JSONDecodeError as exc:
            raise _error(400, "correction-parse", f"invalid JSON: {exc}")
        field_id = body.get("field_id")
        corrected = body.get("corrected_text")
        if not isinstance(field_id, str) or not isinstance(corrected, str):
            raise _error(
                400,
                "correction-parse",
                "body must provide string field_id and corrected_text",
            )
        known = {p["field_id"] for p in record["result"]["predictions"]}
        if field_id not in known:
            raise _error(404, "lookup", f"unknown field {field_id!r}")
        correction = {
            "prediction_id": prediction_id,
            "field_id": field_id,
            "corrected_text": corrected,
            "timestamp": datetime.now(timezone.utc).isoformat(),
        }
        ctx.append_correction(correction)
        return correction

    return app
