/** Prediction review screen: operators inspect each recognized field,
 * accept the machine text or type a correction, and submit corrections
 * back to the service.  Fields needing attention sort first. */

import { ServiceClient } from "./api.js";
import type { PredictionRecord } from "./types.js";

export type ReviewStatus = "pending" | "accepted" | "corrected";

export interface ReviewItem {
  fieldId: string;
  fieldType: string;
  rawText: string;
  enhancedText: string;
  correctedText: string;
  status: ReviewStatus;
  flags: string[];
  registration: string;
}

/** Flags that mean "a human should look at this first". */
const ATTENTION_FLAGS = new Set(["EmptyAfterFilter", "DateRejected"]);

export function isFlagged(item: ReviewItem): boolean {
  return (
    item.registration === "fallback" ||
    item.flags.some((flag) => ATTENTION_FLAGS.has(flag))
  );
}

/** Build editable review state from a service response.  The response
 * objects are copied, never aliased: review must not mutate predictions. */
export function toReviewItems(record: PredictionRecord): ReviewItem[] {
  return record.result.predictions.map((p) => ({
    fieldId: p.field_id,
    fieldType: p.field_type,
    rawText: p.raw_text,
    enhancedText: p.enhanced_text,
    correctedText: p.enhanced_text,
    status: "pending",
    flags: [...p.flags],
    registration: p.registration,
  }));
}

/** Stable sort: flagged items first, original order within each group. */
export function orderForReview(items: readonly ReviewItem[]): ReviewItem[] {
  const flagged = items.filter((item) => isFlagged(item));
  const clean = items.filter((item) => !isFlagged(item));
  return [...flagged, ...clean];
}

export function accept(item: ReviewItem): void {
  item.status = "accepted";
  item.correctedText = item.enhancedText;
}

export function acceptAll(items: readonly ReviewItem[]): void {
  for (const item of items) accept(item);
}

export function editText(item: ReviewItem, text: string): void {
  item.correctedText = text;
  item.status = "corrected";
}

/** Corrections that must be posted: only operator-edited fields. */
export function pendingCorrections(
  items: readonly ReviewItem[],
): { fieldId: string; correctedText: string }[] {
  return items
    .filter((item) => item.status === "corrected")
    .map((item) => ({
      fieldId: item.fieldId,
      correctedText: item.correctedText,
    }));
}

export async function submitCorrections(
  client: ServiceClient,
  predictionId: string,
  items: readonly ReviewItem[],
): Promise<number> {
  const corrections = pendingCorrections(items);
  for (const correction of corrections) {
    await client.postCorrection(
      predictionId,
      correction.fieldId,
      correction.correctedText,
    );
  }
  return corrections.length;
}

// --------------------------------------------------------------------------
// DOM component
// --------------------------------------------------------------------------

export interface ReviewHandle {
  items: ReviewItem[];
  refresh(): void;
}

export function mountReview(
  root: HTMLElement,
  client: ServiceClient,
): ReviewHandle {
  let record: PredictionRecord | null = null;
  const handle: ReviewHandle = { items: [], refresh };

  root.innerHTML = `
    <section class="review">
      <h2>Prediction review</h2>
      <div class="review-load">
        <input data-role="prediction-id" placeholder="prediction id" />
        <button type="button" data-role="load">Load</button>
      </div>
      <p class="error" data-role="error" hidden></p>
      <ol data-role="item-list"></ol>
      <div class="review-submit">
        <button type="button" data-role="accept-all">Accept all</button>
        <button type="button" data-role="submit">Submit corrections</button>
        <span data-role="submit-status"></span>
      </div>
      <ul data-role="correction-list"></ul>
    </section>
  `;

  const query = <T extends Element>(selector: string): T => {
    const found = root.querySelector<T>(selector);
    if (!found) throw new Error(`review markup missing ${selector}`);
    return found;
  };
  const errorBox = query<HTMLParagraphElement>('[data-role="error"]');
  const itemList = query<HTMLOListElement>('[data-role="item-list"]');
  const correctionList = query<HTMLUListElement>(
    '[data-role="correction-list"]',
  );
  const submitStatus = query<HTMLSpanElement>('[data-role="submit-status"]');

  function showError(message: string | null): void {
    errorBox.hidden = message === null;
    errorBox.textContent = message ?? "";
  }

  function renderCorrections(): void {
    correctionList.innerHTML = "";
    for (const correction of record?.corrections ?? []) {
      const entry = document.createElement("li");
      entry.textContent =
        `${correction.field_id}: ${correction.corrected_text}` +
        ` (${correction.timestamp})`;
      correctionList.append(entry);
    }
  }

  function refresh(): void {
    itemList.innerHTML = "";
    for (const item of orderForReview(handle.items)) {
      const entry = document.createElement("li");
      entry.dataset.fieldId = item.fieldId;
      entry.dataset.status = item.status;
      if (isFlagged(item)) entry.classList.add("flagged");

      const label = document.createElement("span");
      label.className = "field-label";
      label.textContent =
        `${item.fieldId} [${item.fieldType}]` +
        (isFlagged(item)
          ? ` — needs attention (${[
              ...item.flags,
              ...(item.registration === "fallback" ? ["fallback"] : []),
            ].join(", ")})`
          : "");

      const rawBox = document.createElement("span");
      rawBox.className = "raw-text";
      rawBox.textContent = item.rawText;

      const editBox = document.createElement("textarea");
      editBox.value = item.correctedText;
      editBox.addEventListener("input", () => {
        editText(item, editBox.value);
        entry.dataset.status = item.status;
      });

      const acceptButton = document.createElement("button");
      acceptButton.type = "button";
      acceptButton.textContent = "accept";
      acceptButton.addEventListener("click", () => {
        accept(item);
        editBox.value = item.correctedText;
        entry.dataset.status = item.status;
      });

      entry.append(label, rawBox, editBox, acceptButton);
      itemList.append(entry);
    }
    renderCorrections();
  }

  query<HTMLButtonElement>('[data-role="load"]').addEventListener(
    "click",
    async () => {
      const id = query<HTMLInputElement>(
        '[data-role="prediction-id"]',
      ).value.trim();
      if (!id) {
        showError("enter a prediction id to load");
        return;
      }
      try {
        record = await client.getPrediction(id);
        handle.items = toReviewItems(record);
        showError(null);
        submitStatus.textContent = "";
        refresh();
      } catch (error) {
        showError(error instanceof Error ? error.message : String(error));
      }
    },
  );

  query<HTMLButtonElement>('[data-role="accept-all"]').addEventListener(
    "click",
    () => {
      acceptAll(handle.items);
      refresh();
    },
  );

  query<HTMLButtonElement>('[data-role="submit"]').addEventListener(
    "click",
    async () => {
      if (!record) {
        showError("load a prediction first");
        return;
      }
      try {
        const posted = await submitCorrections(
          client,
          record.prediction_id,
          handle.items,
        );
        record = await client.getPrediction(record.prediction_id);
        handle.items = toReviewItems(record);
        submitStatus.textContent = `posted ${posted} correction(s)`;
        showError(null);
        refresh();
      } catch (error) {
        showError(error instanceof Error ? error.message : String(error));
      }
    },
  );

  refresh();
  return handle;
}
