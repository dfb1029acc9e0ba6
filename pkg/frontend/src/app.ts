import {
  ApiError,
  fetchHealth,
  fetchLabels,
  fetchPair,
  searchPairs,
  type LabelEntry,
  type SearchResult,
} from "./api";
import { CARD_CHART, DETAIL_CHART, pairChart } from "./chart";

export function badgeText(label: number, direction: string, characteristic: string): string {
  return `label ${label} · ${direction} ${characteristic.replace(/_/g, " ")}`;
}

function messageInto(container: HTMLElement, className: string, text: string): void {
  container.innerHTML = "";
  const p = document.createElement("p");
  p.className = className;
  p.textContent = text;
  container.appendChild(p);
}

export function resultCard(
  result: SearchResult,
  rank: number,
  onSelect: (pairId: string) => void,
): HTMLElement {
  const card = document.createElement("article");
  card.className = "result-card";
  card.dataset.pairId = result.pair_id;

  const header = document.createElement("header");
  const rankSpan = document.createElement("span");
  rankSpan.className = "result-rank";
  rankSpan.textContent = `#${rank}`;
  const idSpan = document.createElement("span");
  idSpan.className = "result-id";
  idSpan.textContent = result.pair_id;
  const scoreSpan = document.createElement("span");
  scoreSpan.className = "result-score";
  scoreSpan.textContent = result.score.toFixed(4);
  header.append(rankSpan, idSpan, scoreSpan);

  const badge = document.createElement("span");
  badge.className = "result-badge";
  badge.textContent = badgeText(result.label, result.target_level, result.characteristic);

  card.append(header, badge, pairChart(result.ref_preview, result.tgt_preview, CARD_CHART));
  card.addEventListener("click", () => onSelect(result.pair_id));
  return card;
}

export async function init(doc: Document): Promise<void> {
  const form = doc.querySelector<HTMLFormElement>("#search-form");
  const input = doc.querySelector<HTMLInputElement>("#query-input");
  const kInput = doc.querySelector<HTMLInputElement>("#k-input");
  const button = doc.querySelector<HTMLButtonElement>("#search-button");
  const status = doc.querySelector<HTMLElement>("#status");
  const results = doc.querySelector<HTMLElement>("#results");
  const detail = doc.querySelector<HTMLElement>("#detail");
  const history = doc.querySelector<HTMLUListElement>("#history");

  if (!form || !input || !kInput || !button || !status || !results || !detail || !history) {
    console.error("search page failed to initialize: expected elements missing");
    return;
  }

  // label -> table row, for badges and refinement suggestions
  let labelTable = new Map<number, LabelEntry>();
  let searchSeq = 0;

  const setLoading = (loading: boolean): void => {
    button.disabled = loading;
    button.textContent = loading ? "Searching…" : "Search";
  };

  const appendHistory = (query: string): void => {
    const item = doc.createElement("li");
    item.textContent = query;
    item.title = "click to reuse this query";
    item.addEventListener("click", () => {
      input.value = query;
      input.focus();
    });
    history.appendChild(item);
  };

  const showDetail = async (pairId: string): Promise<void> => {
    messageInto(detail, "detail-loading", `loading ${pairId}…`);
    let pair;
    try {
      pair = await fetchPair(pairId);
    } catch (err) {
      const text = err instanceof ApiError ? err.message : "failed to load pair";
      messageInto(detail, "error-state", text);
      return;
    }

    detail.innerHTML = "";
    const title = doc.createElement("h2");
    title.textContent = pair.pair_id;
    const badge = doc.createElement("span");
    badge.className = "result-badge";
    badge.textContent = badgeText(pair.label, pair.target_level, pair.characteristic);
    const meta = doc.createElement("p");
    meta.className = "detail-meta";
    meta.textContent = `base ${pair.base_id} · ${pair.length} samples`;
    detail.append(title, badge, pairChart(pair.ref, pair.tgt, DETAIL_CHART), meta);

    // canonical phrasings for this characteristic, both directions
    const suggestions = [...labelTable.values()].filter(
      (entry) => entry.characteristic === pair.characteristic,
    );
    if (suggestions.length > 0) {
      const refine = doc.createElement("div");
      refine.className = "refine";
      const heading = doc.createElement("h3");
      heading.textContent = "Refine";
      refine.appendChild(heading);
      for (const entry of suggestions) {
        const suggestion = doc.createElement("button");
        suggestion.type = "button";
        suggestion.className = "refine-suggestion";
        suggestion.textContent = entry.template;
        suggestion.addEventListener("click", () => {
          input.value = entry.template;
          input.focus();
        });
        refine.appendChild(suggestion);
      }
      detail.appendChild(refine);
    }
  };

  const runSearch = async (): Promise<void> => {
    const query = input.value.trim();
    if (!query) {
      status.textContent = "enter a query first";
      return;
    }
    const k = Number(kInput.value);
    if (!Number.isInteger(k) || k < 1) {
      status.textContent = "k must be a positive integer";
      return;
    }

    appendHistory(query);
    const seq = ++searchSeq;
    setLoading(true);
    status.textContent = "";
    try {
      const response = await searchPairs(query, k);
      if (seq !== searchSeq) {
        return; // superseded by a newer query
      }
      results.innerHTML = "";
      if (response.results.length === 0) {
        messageInto(results, "empty-state", "no results");
      } else {
        response.results.forEach((result, i) => {
          results.appendChild(resultCard(result, i + 1, showDetail));
        });
      }
      status.textContent =
        `${response.results.length} results in ${(response.latency_s * 1000).toFixed(0)} ms`;
    } catch (err) {
      if (seq !== searchSeq) {
        return;
      }
      const text = err instanceof ApiError ? err.message : "search failed";
      messageInto(results, "error-state", text);
    } finally {
      if (seq === searchSeq) {
        setLoading(false);
      }
    }
  };

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    void runSearch();
  });

  try {
    const health = await fetchHealth();
    status.textContent =
      health.status === "ready"
        ? `ready · ${health.index_size} pairs indexed`
        : "service is still loading artifacts";
  } catch (err) {
    const text = err instanceof ApiError ? err.message : "health check failed";
    status.textContent = text;
  }

  try {
    const entries = await fetchLabels();
    labelTable = new Map(entries.map((entry) => [entry.label, entry]));
  } catch {
    // suggestions simply stay hidden if the table cannot be fetched
  }
}
