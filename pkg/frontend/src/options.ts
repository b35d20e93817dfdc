/** Options page: a single service URL field. */

import { DEFAULT_SERVICE_URL, loadServiceUrl, saveServiceUrl } from "./storage";

export async function initOptions(doc: Document): Promise<void> {
  const form = doc.querySelector<HTMLFormElement>("#options-form");
  const input = doc.querySelector<HTMLInputElement>("#service-url");
  const status = doc.querySelector<HTMLElement>("#status");
  if (!form || !input || !status) {
    return;
  }
  input.placeholder = DEFAULT_SERVICE_URL;
  input.value = await loadServiceUrl();
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    void saveServiceUrl(input.value).then(async () => {
      input.value = await loadServiceUrl();
      status.textContent = "Saved";
    });
  });
}

if (typeof document !== "undefined" && document.querySelector("#options-form")) {
  void initOptions(document);
}
