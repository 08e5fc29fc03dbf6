/** Template editor: draw 4-point field regions over a template image,
 * assign field types (plus allowed values for Defined Label fields) and
 * export the result to the recognition service. */

import { ServiceClient } from "./api.js";
import { quadProblems } from "./quad.js";
import {
  FIELD_TYPES,
  type FieldType,
  type Point,
  type TemplatePayload,
} from "./types.js";

export interface EditorShape {
  id: string;
  type: FieldType;
  points: Point[];
  possibilities: string[];
}

export interface TemplateDraft {
  shapes: EditorShape[];
  /** base64-encoded PNG, as stored in the template's imageData field */
  imageData: string | null;
  imageWidth: number;
  imageHeight: number;
  /** quad under construction, up to 4 points */
  pending: Point[];
}

export function createDraft(): TemplateDraft {
  return {
    shapes: [],
    imageData: null,
    imageWidth: 0,
    imageHeight: 0,
    pending: [],
  };
}

export function setImage(
  draft: TemplateDraft,
  imageData: string,
  width: number,
  height: number,
): void {
  draft.imageData = imageData;
  draft.imageWidth = width;
  draft.imageHeight = height;
}

/** Add the next corner of the quad under construction (ignored once full). */
export function placePoint(draft: TemplateDraft, x: number, y: number): void {
  if (draft.pending.length < 4) {
    draft.pending.push([x, y]);
  }
}

export function resetPending(draft: TemplateDraft): void {
  draft.pending = [];
}

export type CommitResult = { ok: true } | { ok: false; error: string };

/** Promote the pending quad to a committed shape, or explain why not. */
export function commitShape(
  draft: TemplateDraft,
  id: string,
  type: FieldType,
  possibilities: string[],
): CommitResult {
  const trimmedId = id.trim();
  if (!trimmedId) {
    return { ok: false, error: "field id must not be empty" };
  }
  if (draft.shapes.some((s) => s.id === trimmedId)) {
    return { ok: false, error: `duplicate field id "${trimmedId}"` };
  }
  const problems = quadProblems(draft.pending);
  if (problems.length > 0) {
    return { ok: false, error: problems[0]!.message };
  }
  const cleaned = possibilities.map((p) => p.trim()).filter((p) => p.length > 0);
  if (type === "Defined Label" && cleaned.length === 0) {
    return {
      ok: false,
      error: "Defined Label fields need at least one allowed value",
    };
  }
  draft.shapes.push({
    id: trimmedId,
    type,
    points: draft.pending.map((p) => [p[0], p[1]] as Point),
    possibilities: cleaned,
  });
  draft.pending = [];
  return { ok: true };
}

export function removeShape(draft: TemplateDraft, id: string): void {
  draft.shapes = draft.shapes.filter((s) => s.id !== id);
}

export interface DraftProblem {
  shapeId: string | null;
  message: string;
}

/** Everything that would make the service reject this draft. */
export function draftProblems(draft: TemplateDraft): DraftProblem[] {
  const problems: DraftProblem[] = [];
  if (!draft.imageData) {
    problems.push({ shapeId: null, message: "no template image loaded" });
  }
  const seen = new Set<string>();
  for (const shape of draft.shapes) {
    if (seen.has(shape.id)) {
      problems.push({
        shapeId: shape.id,
        message: `duplicate field id "${shape.id}"`,
      });
    }
    seen.add(shape.id);
    for (const problem of quadProblems(shape.points)) {
      problems.push({ shapeId: shape.id, message: problem.message });
    }
    if (shape.type === "Defined Label" && shape.possibilities.length === 0) {
      problems.push({
        shapeId: shape.id,
        message: "Defined Label fields need at least one allowed value",
      });
    }
  }
  return problems;
}

/** Serialize the draft in the service's template schema.
 * Throws when draftProblems() is non-empty. */
export function buildTemplatePayload(draft: TemplateDraft): TemplatePayload {
  const problems = draftProblems(draft);
  if (problems.length > 0) {
    throw new Error(problems.map((p) => p.message).join("; "));
  }
  return {
    shapes: draft.shapes.map((s) => ({
      id: s.id,
      type: s.type,
      points: s.points.map((p) => [p[0], p[1]] as Point),
      possibilities: [...s.possibilities],
    })),
    imageData: draft.imageData!,
  };
}

/** Rebuild a draft from a stored template (for re-editing). */
export function loadDraftFromPayload(payload: TemplatePayload): TemplateDraft {
  const draft = createDraft();
  draft.imageData = payload.imageData;
  draft.shapes = payload.shapes.map((s) => ({
    id: s.id,
    type: s.type,
    points: s.points.map((p) => [p[0], p[1]] as Point),
    possibilities: [...(s.possibilities ?? [])],
  }));
  return draft;
}

// --------------------------------------------------------------------------
// DOM component
// --------------------------------------------------------------------------

export interface EditorHandle {
  draft: TemplateDraft;
  refresh(): void;
}

export function mountEditor(
  root: HTMLElement,
  client: ServiceClient,
): EditorHandle {
  const draft = createDraft();
  root.innerHTML = `
    <section class="editor">
      <h2>Template editor</h2>
      <div class="editor-image">
        <input type="file" accept="image/png" data-role="image-input" />
        <canvas data-role="canvas" width="0" height="0"></canvas>
      </div>
      <form data-role="shape-form">
        <input name="shape-id" placeholder="field id" />
        <select name="shape-type">
          ${FIELD_TYPES.map((t) => `<option value="${t}">${t}</option>`).join("")}
        </select>
        <textarea
          name="possibilities"
          placeholder="allowed values, one per line (Defined Label only)"
        ></textarea>
        <button type="submit" data-role="commit">Add field</button>
        <button type="button" data-role="reset-points">Clear points</button>
        <span data-role="pending-count">0 points</span>
      </form>
      <ul data-role="shape-list"></ul>
      <p class="error" data-role="error" hidden></p>
      <div class="editor-export">
        <button type="button" data-role="export">Export template</button>
        <span data-role="template-id"></span>
      </div>
      <div class="editor-load">
        <input data-role="load-id" placeholder="template id" />
        <button type="button" data-role="load">Load template</button>
      </div>
    </section>
  `;

  const query = <T extends Element>(selector: string): T => {
    const found = root.querySelector<T>(selector);
    if (!found) throw new Error(`editor markup missing ${selector}`);
    return found;
  };
  const canvas = query<HTMLCanvasElement>('[data-role="canvas"]');
  const errorBox = query<HTMLParagraphElement>('[data-role="error"]');
  const shapeList = query<HTMLUListElement>('[data-role="shape-list"]');
  const pendingCount = query<HTMLSpanElement>('[data-role="pending-count"]');
  const templateIdBox = query<HTMLSpanElement>('[data-role="template-id"]');

  function showError(message: string | null): void {
    errorBox.hidden = message === null;
    errorBox.textContent = message ?? "";
  }

  function repaint(): void {
    canvas.width = draft.imageWidth;
    canvas.height = draft.imageHeight;
    let context: CanvasRenderingContext2D | null = null;
    try {
      context = canvas.getContext("2d");
    } catch {
      context = null;
    }
    if (!context) return; // non-rendering environments skip painting
    context.clearRect(0, 0, canvas.width, canvas.height);
    if (draft.imageData) {
      const image = new Image();
      image.onload = () => {
        context.drawImage(image, 0, 0);
        paintShapes(context);
      };
      image.src = `data:image/png;base64,${draft.imageData}`;
    } else {
      paintShapes(context);
    }
  }

  function paintShapes(context: CanvasRenderingContext2D): void {
    for (const shape of draft.shapes) {
      context.strokeStyle = "#0a7";
      context.beginPath();
      shape.points.forEach(([x, y], index) =>
        index === 0 ? context.moveTo(x, y) : context.lineTo(x, y),
      );
      context.closePath();
      context.stroke();
    }
    context.fillStyle = "#d33";
    for (const [x, y] of draft.pending) {
      context.beginPath();
      context.arc(x, y, 3, 0, 2 * Math.PI);
      context.fill();
    }
  }

  function refresh(): void {
    pendingCount.textContent = `${draft.pending.length} points`;
    shapeList.innerHTML = "";
    for (const shape of draft.shapes) {
      const item = document.createElement("li");
      item.dataset.shapeId = shape.id;
      item.textContent =
        `${shape.id} (${shape.type}) ` +
        shape.points.map(([x, y]) => `(${x},${y})`).join(" ");
      const remove = document.createElement("button");
      remove.type = "button";
      remove.textContent = "remove";
      remove.addEventListener("click", () => {
        removeShape(draft, shape.id);
        refresh();
      });
      item.append(" ", remove);
      shapeList.append(item);
    }
    repaint();
  }

  canvas.addEventListener("click", (event) => {
    const rect = canvas.getBoundingClientRect();
    const scaleX = rect.width > 0 ? canvas.width / rect.width : 1;
    const scaleY = rect.height > 0 ? canvas.height / rect.height : 1;
    placePoint(
      draft,
      Math.round((event.clientX - rect.left) * scaleX),
      Math.round((event.clientY - rect.top) * scaleY),
    );
    refresh();
  });

  query<HTMLInputElement>('[data-role="image-input"]').addEventListener(
    "change",
    (event) => {
      const input = event.target as HTMLInputElement;
      const file = input.files?.[0];
      if (!file) return;
      const reader = new FileReader();
      reader.onload = () => {
        const dataUrl = reader.result as string;
        const base64 = dataUrl.slice(dataUrl.indexOf(",") + 1);
        const image = new Image();
        image.onload = () => {
          setImage(draft, base64, image.naturalWidth, image.naturalHeight);
          refresh();
        };
        image.src = dataUrl;
      };
      reader.readAsDataURL(file);
    },
  );

  query<HTMLFormElement>('[data-role="shape-form"]').addEventListener(
    "submit",
    (event) => {
      event.preventDefault();
      const form = event.target as HTMLFormElement;
      const idInput = form.elements.namedItem("shape-id") as HTMLInputElement;
      const typeInput = form.elements.namedItem(
        "shape-type",
      ) as HTMLSelectElement;
      const possibilitiesInput = form.elements.namedItem(
        "possibilities",
      ) as HTMLTextAreaElement;
      const result = commitShape(
        draft,
        idInput.value,
        typeInput.value as FieldType,
        possibilitiesInput.value.split("\n"),
      );
      if (!result.ok) {
        showError(result.error);
        return;
      }
      showError(null);
      idInput.value = "";
      possibilitiesInput.value = "";
      refresh();
    },
  );

  query<HTMLButtonElement>('[data-role="reset-points"]').addEventListener(
    "click",
    () => {
      resetPending(draft);
      refresh();
    },
  );

  query<HTMLButtonElement>('[data-role="export"]').addEventListener(
    "click",
    async () => {
      let payload: TemplatePayload;
      try {
        payload = buildTemplatePayload(draft);
      } catch (error) {
        showError(error instanceof Error ? error.message : String(error));
        return;
      }
      try {
        const templateId = await client.uploadTemplate(payload);
        showError(null);
        templateIdBox.textContent = templateId;
      } catch (error) {
        showError(error instanceof Error ? error.message : String(error));
      }
    },
  );

  query<HTMLButtonElement>('[data-role="load"]').addEventListener(
    "click",
    async () => {
      const id = query<HTMLInputElement>('[data-role="load-id"]').value.trim();
      if (!id) {
        showError("enter a template id to load");
        return;
      }
      try {
        const payload = await client.getTemplate(id);
        const loaded = loadDraftFromPayload(payload);
        draft.shapes = loaded.shapes;
        draft.imageData = loaded.imageData;
        draft.pending = [];
        showError(null);
        refresh();
      } catch (error) {
        showError(error instanceof Error ? error.message : String(error));
      }
    },
  );

  refresh();
  return { draft, refresh };
}
