/** Typed HTTP client for the recognition service. */

import {
  PredictionRecordSchema,
  ServiceErrorSchema,
  TemplatePayloadSchema,
  type Correction,
  type PredictionRecord,
  type TemplatePayload,
} from "./types.js";
import { z } from "zod";

export class ServiceError extends Error {
  constructor(
    readonly status: number,
    readonly stage: string,
    message: string,
  ) {
    super(`[${stage}] ${message}`);
    this.name = "ServiceError";
  }
}

/** Multipart encoder producing a plain byte body.  Runtime-provided FormData
 * classes differ between environments (a DOM FormData cannot be serialized by
 * a non-DOM fetch), so the wire format is built here explicitly. */
function encodeMultipart(
  fields: Array<
    | { name: string; value: string }
    | { name: string; filename: string; type: string; bytes: Uint8Array }
  >,
): { contentType: string; body: Uint8Array<ArrayBuffer> } {
  const boundary = `----invizo-${Date.now().toString(36)}-${Math.random()
    .toString(36)
    .slice(2)}`;
  const encoder = new TextEncoder();
  const chunks: Uint8Array[] = [];
  for (const field of fields) {
    if ("bytes" in field) {
      chunks.push(
        encoder.encode(
          `--${boundary}\r\n` +
            `Content-Disposition: form-data; name="${field.name}"; ` +
            `filename="${field.filename}"\r\n` +
            `Content-Type: ${field.type}\r\n\r\n`,
        ),
        field.bytes,
        encoder.encode("\r\n"),
      );
    } else {
      chunks.push(
        encoder.encode(
          `--${boundary}\r\n` +
            `Content-Disposition: form-data; name="${field.name}"\r\n\r\n` +
            `${field.value}\r\n`,
        ),
      );
    }
  }
  chunks.push(encoder.encode(`--${boundary}--\r\n`));
  const total = chunks.reduce((n, c) => n + c.byteLength, 0);
  const body = new Uint8Array(total);
  let offset = 0;
  for (const chunk of chunks) {
    body.set(chunk, offset);
    offset += chunk.byteLength;
  }
  return { contentType: `multipart/form-data; boundary=${boundary}`, body };
}

async function raiseForStatus(response: Response): Promise<void> {
  if (response.ok) return;
  let stage = "unknown";
  let message = `HTTP ${response.status}`;
  try {
    const body = ServiceErrorSchema.parse(await response.json());
    stage = body.detail.stage;
    message = body.detail.message;
  } catch {
    // non-JSON or unexpected error body; keep the generic message
  }
  throw new ServiceError(response.status, stage, message);
}

export class ServiceClient {
  constructor(
    readonly baseUrl: string = "",
    private readonly fetchImpl: typeof fetch = fetch,
  ) {}

  private url(path: string): string {
    return `${this.baseUrl}${path}`;
  }

  async health(): Promise<{ status: string }> {
    const response = await this.fetchImpl(this.url("/api/health"));
    await raiseForStatus(response);
    return (await response.json()) as { status: string };
  }

  async uploadTemplate(payload: TemplatePayload): Promise<string> {
    const response = await this.fetchImpl(this.url("/api/templates"), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(payload),
    });
    await raiseForStatus(response);
    const body = z
      .object({ template_id: z.string() })
      .parse(await response.json());
    return body.template_id;
  }

  async listTemplates(): Promise<string[]> {
    const response = await this.fetchImpl(this.url("/api/templates"));
    await raiseForStatus(response);
    return z
      .object({ templates: z.array(z.string()) })
      .parse(await response.json()).templates;
  }

  async getTemplate(templateId: string): Promise<TemplatePayload> {
    const response = await this.fetchImpl(
      this.url(`/api/templates/${encodeURIComponent(templateId)}`),
    );
    await raiseForStatus(response);
    return TemplatePayloadSchema.parse(await response.json());
  }

  async recognize(
    imageBytes: Uint8Array,
    templateId: string,
  ): Promise<PredictionRecord> {
    const { contentType, body } = encodeMultipart([
      {
        name: "image",
        filename: "document.png",
        type: "image/png",
        bytes: imageBytes,
      },
      { name: "template_id", value: templateId },
    ]);
    const response = await this.fetchImpl(this.url("/api/recognize"), {
      method: "POST",
      headers: { "content-type": contentType },
      body,
    });
    await raiseForStatus(response);
    const record = await response.json();
    // POST /api/recognize returns the record without a corrections list.
    return PredictionRecordSchema.parse({ corrections: [], ...record });
  }

  async getPrediction(predictionId: string): Promise<PredictionRecord> {
    const response = await this.fetchImpl(
      this.url(`/api/predictions/${encodeURIComponent(predictionId)}`),
    );
    await raiseForStatus(response);
    return PredictionRecordSchema.parse(await response.json());
  }

  async postCorrection(
    predictionId: string,
    fieldId: string,
    correctedText: string,
  ): Promise<Correction> {
    const response = await this.fetchImpl(
      this.url(
        `/api/predictions/${encodeURIComponent(predictionId)}/corrections`,
      ),
      {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({
          field_id: fieldId,
          corrected_text: correctedText,
        }),
      },
    );
    await raiseForStatus(response);
    const body = (await response.json()) as Correction;
    return body;
  }
}
