/** Content script: one APIze button per answer code block.
 *
 * Buttons and panels are strictly additive. Each snippet allows a single
 * in-flight request; clicks while one is pending are no-ops.
 */

import { ApizeError, apize } from "./api";
import { detectSnippets, extractContext, type Snippet } from "./page";
import { ensurePanel, renderError, renderPending, renderResult } from "./panel";
import { loadServiceUrl } from "./storage";

const MARKER = "data-c2a-button";

const inflight = new WeakSet<HTMLPreElement>();

export async function handleClick(
  doc: Document,
  snippet: Snippet,
  button: HTMLElement,
): Promise<void> {
  if (inflight.has(snippet.pre)) {
    return;
  }
  inflight.add(snippet.pre);
  const panel = ensurePanel(doc, button);
  renderPending(panel);
  try {
    const serviceUrl = await loadServiceUrl();
    const result = await apize(serviceUrl, extractContext(doc, snippet));
    renderResult(panel, result);
  } catch (error) {
    renderError(
      panel,
      error instanceof ApizeError ? error : new ApizeError(0, String(error)),
    );
  } finally {
    inflight.delete(snippet.pre);
  }
}

export function injectButtons(doc: Document): number {
  let added = 0;
  for (const snippet of detectSnippets(doc)) {
    if (snippet.pre.hasAttribute(MARKER)) {
      continue;
    }
    snippet.pre.setAttribute(MARKER, "1");
    const button = doc.createElement("button");
    button.type = "button";
    button.className = "c2a-button";
    button.textContent = "APIze";
    button.title = "Turn this snippet into a reusable API";
    snippet.pre.insertAdjacentElement("afterend", button);
    button.addEventListener("click", () => {
      void handleClick(doc, snippet, button);
    });
    added += 1;
  }
  return added;
}

// self-start only on a real Stack Overflow page
if (
  typeof location !== "undefined" &&
  /(^|\.)stackoverflow\.com$/.test(location.hostname)
) {
  injectButtons(document);
}
