/** Result panel shown under a snippet. Panels are additive: they are
 * inserted after existing content and never remove or reorder it. */

import type { ApizeResult } from "./api";
import { ApizeError } from "./api";

export function signatureOf(result: ApizeResult): string {
  const params = result.parameters
    .map((p) => `${p.type} ${p.name}`.trim())
    .join(", ");
  return `${result.return_type} ${result.method_name}(${params})`;
}

/** The panel for a button, created on first use, reused afterwards. */
export function ensurePanel(doc: Document, button: HTMLElement): HTMLElement {
  const next = button.nextElementSibling;
  if (next instanceof HTMLElement && next.classList.contains("c2a-panel")) {
    return next;
  }
  const panel = doc.createElement("div");
  panel.className = "c2a-panel";
  button.insertAdjacentElement("afterend", panel);
  return panel;
}

export function renderPending(panel: HTMLElement): void {
  panel.className = "c2a-panel c2a-pending";
  panel.textContent = "APIzing…";
}

export function renderResult(panel: HTMLElement, result: ApizeResult): void {
  const doc = panel.ownerDocument;
  panel.className = "c2a-panel c2a-result";
  panel.replaceChildren();

  const name = doc.createElement("div");
  name.className = "c2a-method-name";
  name.textContent = result.method_name;
  panel.appendChild(name);

  const signature = doc.createElement("code");
  signature.className = "c2a-signature";
  signature.textContent = signatureOf(result);
  panel.appendChild(signature);

  if (result.imports.length > 0) {
    const imports = doc.createElement("div");
    imports.className = "c2a-imports";
    imports.textContent = result.imports
      .map((imp) => `import ${imp};`)
      .join(" ");
    panel.appendChild(imports);
  }

  const source = doc.createElement("pre");
  source.className = "c2a-source";
  const code = doc.createElement("code");
  code.textContent = result.complete_source;
  source.appendChild(code);
  panel.appendChild(source);

  const copy = doc.createElement("button");
  copy.type = "button";
  copy.className = "c2a-copy";
  copy.textContent = "Copy API";
  copy.addEventListener("click", () => {
    void navigator.clipboard?.writeText(result.complete_source).then(() => {
      copy.textContent = "Copied";
    });
  });
  panel.appendChild(copy);
}

export function renderError(panel: HTMLElement, error: ApizeError): void {
  // each failure mode keeps its own look so users can tell them apart
  let variant = "c2a-failed";
  let message = `APIzation failed: ${error.message}`;
  if (error.status === 413) {
    variant = "c2a-too-large";
    message = "This snippet's context is too large for the model. " +
      "Try a smaller snippet.";
  } else if (error.status === 502) {
    variant = "c2a-backend-down";
    message = "The APIzation service hit a backend failure. Try again shortly.";
  } else if (error.status === 0) {
    variant = "c2a-unreachable";
    message = `${error.message}. Is the service running? ` +
      "Check the extension options.";
  }
  panel.className = `c2a-panel c2a-error ${variant}`;
  panel.textContent = message;
}
