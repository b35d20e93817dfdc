import { beforeEach, describe, expect, it, vi } from "vitest";

import { ApizeError } from "../src/api";
import {
  ensurePanel,
  renderError,
  renderPending,
  renderResult,
  signatureOf,
} from "../src/panel";
import { WORKED_SOURCE, workedResult } from "./helpers";

let panel: HTMLElement;

beforeEach(() => {
  document.body.innerHTML = '<button id="b">APIze</button>';
  panel = ensurePanel(document, document.querySelector("#b")!);
});

describe("signatureOf", () => {
  it("renders type name(params)", () => {
    expect(signatureOf(workedResult())).toBe(
      "List<Integer> convertIntArrayToList(int[] arr)",
    );
  });

  it("handles empty parameter lists", () => {
    expect(signatureOf({ ...workedResult(), parameters: [] })).toBe(
      "List<Integer> convertIntArrayToList()",
    );
  });
});

describe("ensurePanel", () => {
  it("inserts after the button and is reused on the next call", () => {
    const button = document.querySelector<HTMLElement>("#b")!;
    expect(button.nextElementSibling).toBe(panel);
    expect(ensurePanel(document, button)).toBe(panel);
    expect(document.querySelectorAll(".c2a-panel")).toHaveLength(1);
  });
});

describe("renderResult", () => {
  it("shows name, signature, imports and the full source", () => {
    renderResult(panel, workedResult());
    expect(panel.querySelector(".c2a-method-name")!.textContent).toBe(
      "convertIntArrayToList",
    );
    expect(panel.querySelector(".c2a-signature")!.textContent).toBe(
      "List<Integer> convertIntArrayToList(int[] arr)",
    );
    expect(panel.querySelector(".c2a-imports")!.textContent).toContain(
      "import java.util.ArrayList;",
    );
    expect(panel.querySelector(".c2a-source code")!.textContent).toBe(
      WORKED_SOURCE,
    );
  });

  it("copies the complete source to the clipboard", async () => {
    const writeText = vi.fn().mockResolvedValue(undefined);
    Object.defineProperty(navigator, "clipboard", {
      value: { writeText },
      configurable: true,
    });
    renderResult(panel, workedResult());
    panel.querySelector<HTMLElement>(".c2a-copy")!.click();
    await Promise.resolve();
    expect(writeText).toHaveBeenCalledTimes(1);
    expect(writeText).toHaveBeenCalledWith(WORKED_SOURCE);
  });

  it("re-rendering replaces earlier panel content", () => {
    renderPending(panel);
    renderResult(panel, workedResult());
    expect(panel.textContent).not.toContain("APIzing");
    expect(panel.querySelectorAll(".c2a-method-name")).toHaveLength(1);
  });
});

describe("renderError", () => {
  it("gives 413 its own state", () => {
    renderError(panel, new ApizeError(413, "estimate exceeds budget"));
    expect(panel.classList.contains("c2a-too-large")).toBe(true);
    expect(panel.textContent).toContain("too large");
  });

  it("gives 502 a distinct state", () => {
    renderError(panel, new ApizeError(502, "backend failure: boom"));
    expect(panel.classList.contains("c2a-backend-down")).toBe(true);
    expect(panel.classList.contains("c2a-too-large")).toBe(false);
    expect(panel.textContent).toContain("backend failure");
    expect(panel.textContent).not.toContain("too large");
  });

  it("explains an unreachable service", () => {
    renderError(panel, new ApizeError(0, "service unreachable at http://localhost:8080"));
    expect(panel.classList.contains("c2a-unreachable")).toBe(true);
    expect(panel.textContent).toContain("extension options");
  });

  it("falls back to the raw detail for other statuses", () => {
    renderError(panel, new ApizeError(404, "question 1 not found"));
    expect(panel.classList.contains("c2a-failed")).toBe(true);
    expect(panel.textContent).toContain("question 1 not found");
  });
});
