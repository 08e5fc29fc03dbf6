/** End-to-end checks against a live fixture service (spawned as a child
 * process): template authoring round trip and correction persistence,
 * driven through the same DOM components the browser uses. */

import { spawn, type ChildProcess } from "node:child_process";
import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { afterAll, beforeAll, describe, expect, it, vi } from "vitest";

import { ServiceClient } from "../src/api.js";
import {
  buildTemplatePayload,
  commitShape,
  createDraft,
  loadDraftFromPayload,
  mountEditor,
  placePoint,
  setImage,
} from "../src/editor.js";
import { mountReview } from "../src/review.js";

const here = dirname(fileURLToPath(import.meta.url));
const pngBytes = readFileSync(join(here, "fixtures", "blank64x96.png"));
const pngBase64 = pngBytes.toString("base64");

const port = 20000 + Math.floor(Math.random() * 40000);
const base = `http://127.0.0.1:${port}`;
let service: ChildProcess;
const client = new ServiceClient(base);

async function waitForHealth(timeoutMs = 90000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  let lastError: unknown = null;
  while (Date.now() < deadline) {
    try {
      const body = await client.health();
      if (body.status === "ok") return;
    } catch (error) {
      lastError = error;
    }
    await new Promise((resolve) => setTimeout(resolve, 500));
  }
  throw new Error(`fixture service never became healthy: ${lastError}`);
}

beforeAll(async () => {
  service = spawn(
    "python3",
    [join(here, "fixtures", "serve_fixture.py"), "--port", String(port)],
    { stdio: ["ignore", "inherit", "inherit"] },
  );
  await waitForHealth();
}, 120000);

afterAll(() => {
  service?.kill("SIGTERM");
});

function authorDraft() {
  const draft = createDraft();
  setImage(draft, pngBase64, 64, 96);
  placePoint(draft, 4, 4);
  placePoint(draft, 60, 4);
  placePoint(draft, 60, 28);
  placePoint(draft, 4, 28);
  commitShape(draft, "name", "Single Line", []);
  placePoint(draft, 4, 40);
  placePoint(draft, 60, 40);
  placePoint(draft, 60, 64);
  placePoint(draft, 4, 64);
  commitShape(draft, "city", "Defined Label", ["دمشق", "حلب"]);
  return draft;
}

describe("template round trip through the live service", () => {
  it("stores and returns the exact authored quads", async () => {
    const draft = authorDraft();
    const payload = buildTemplatePayload(draft);
    const templateId = await client.uploadTemplate(payload);
    expect(templateId).toMatch(/^[0-9a-f]{16}$/);

    const fetched = await client.getTemplate(templateId);
    const reloaded = loadDraftFromPayload(fetched);
    expect(reloaded.shapes.map((s) => s.points)).toEqual(
      draft.shapes.map((s) => s.points),
    );
    expect(reloaded.shapes.map((s) => s.type)).toEqual(
      draft.shapes.map((s) => s.type),
    );
    expect(reloaded.shapes[1]?.possibilities).toEqual(["دمشق", "حلب"]);

    // re-uploading the identical payload is idempotent (same id)
    const again = await client.uploadTemplate(buildTemplatePayload(reloaded));
    expect(again).toBe(templateId);
  }, 120000);

  it("re-renders identical quads in the editor after loading by id", async () => {
    const draft = authorDraft();
    const templateId = await client.uploadTemplate(buildTemplatePayload(draft));

    document.body.innerHTML = '<div id="root"></div>';
    const handle = mountEditor(
      document.getElementById("root") as HTMLElement,
      client,
    );
    (
      document.querySelector('[data-role="load-id"]') as HTMLInputElement
    ).value = templateId;
    (document.querySelector('[data-role="load"]') as HTMLButtonElement).click();
    await vi.waitFor(() => expect(handle.draft.shapes).toHaveLength(2), {
      timeout: 15000,
    });
    expect(handle.draft.shapes.map((s) => s.points)).toEqual(
      draft.shapes.map((s) => s.points),
    );
    const listed = [
      ...document.querySelectorAll('[data-role="shape-list"] li'),
    ].map((li) => li.textContent ?? "");
    expect(listed[0]).toContain("(4,4)");
    expect(listed[1]).toContain("(4,40)");
  }, 120000);
});

describe("correction round trip through the live service", () => {
  it("a correction posted from the review screen is returned by the next fetch", async () => {
    const draft = authorDraft();
    const templateId = await client.uploadTemplate(buildTemplatePayload(draft));
    const record = await client.recognize(new Uint8Array(pngBytes), templateId);
    expect(record.result.predictions).toHaveLength(2);

    document.body.innerHTML = '<div id="root"></div>';
    const handle = mountReview(
      document.getElementById("root") as HTMLElement,
      client,
    );
    (
      document.querySelector('[data-role="prediction-id"]') as HTMLInputElement
    ).value = record.prediction_id;
    (document.querySelector('[data-role="load"]') as HTMLButtonElement).click();
    await vi.waitFor(() => expect(handle.items).toHaveLength(2), {
      timeout: 15000,
    });

    // operator corrects the first listed field
    const row = document.querySelector(
      '[data-role="item-list"] li',
    ) as HTMLElement;
    const fieldId = row.dataset.fieldId!;
    const textarea = row.querySelector("textarea") as HTMLTextAreaElement;
    textarea.value = "محمد";
    textarea.dispatchEvent(new Event("input", { bubbles: true }));
    (
      document.querySelector('[data-role="submit"]') as HTMLButtonElement
    ).click();
    await vi.waitFor(
      () =>
        expect(
          (
            document.querySelector(
              '[data-role="submit-status"]',
            ) as HTMLSpanElement
          ).textContent,
        ).toContain("posted 1"),
      { timeout: 15000 },
    );

    // independent fetch: the correction is persisted server-side
    const fetched = await client.getPrediction(record.prediction_id);
    expect(fetched.corrections).toHaveLength(1);
    expect(fetched.corrections[0]).toMatchObject({
      prediction_id: record.prediction_id,
      field_id: fieldId,
      corrected_text: "محمد",
    });

    // and the review screen now lists it
    const listed = document.querySelector(
      '[data-role="correction-list"] li',
    ) as HTMLElement;
    expect(listed.textContent).toContain("محمد");
  }, 120000);
});
