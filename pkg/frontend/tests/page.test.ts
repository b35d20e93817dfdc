import { beforeEach, describe, expect, it } from "vitest";

import { detectSnippets, extractContext, pageLanguage } from "../src/page";
import { mountFixture } from "./helpers";

describe("detectSnippets", () => {
  beforeEach(mountFixture);

  it("finds exactly the answer-body code blocks", () => {
    // hand count from the fixture: 1 + 2
    expect(detectSnippets(document)).toHaveLength(3);
  });

  it("attributes each snippet to its answer", () => {
    const ids = detectSnippets(document).map((s) => s.answerId);
    expect(ids).toEqual([1073921, 2002, 2002]);
  });

  it("never picks question-body or inline code", () => {
    for (const snippet of detectSnippets(document)) {
      expect(snippet.pre.closest("#question")).toBeNull();
      expect(snippet.pre.closest(".comments")).toBeNull();
      expect(snippet.pre.tagName).toBe("PRE");
    }
    // the question block would have matched a naive pre > code selector
    expect(document.querySelectorAll("#question pre > code")).toHaveLength(1);
  });

  it("keeps the snippet text verbatim", () => {
    const first = detectSnippets(document)[0];
    expect(first.code).toContain("List<Integer> intList = new ArrayList<Integer>();");
    expect(first.code).toContain("intList.add(i);");
  });
});

describe("extractContext", () => {
  beforeEach(mountFixture);

  it("builds the request from title, bodies and snippet", () => {
    const snippet = detectSnippets(document)[0];
    const ctx = extractContext(document, snippet);
    expect(ctx.question_title).toBe(
      "How to convert int[] into List<Integer> in Java?",
    );
    expect(ctx.question_body).toContain("int[] array and want to turn it");
    expect(ctx.answer_body).toContain("no autoboxing for arrays");
    expect(ctx.code_snippet).toBe(
      "List<Integer> intList = new ArrayList<Integer>();\n" +
        "for (int i : ints){\n    intList.add(i);\n}",
    );
    expect(ctx.answer_id).toBe(1073921);
    expect(ctx.language).toBe("java");
  });

  it("scopes the answer body to the snippet's own answer", () => {
    const third = detectSnippets(document)[2];
    const ctx = extractContext(document, third);
    expect(ctx.answer_body).toContain("With streams");
    expect(ctx.answer_body).not.toContain("no autoboxing");
    expect(ctx.answer_id).toBe(2002);
  });
});

describe("pageLanguage", () => {
  it("defaults to java", () => {
    mountFixture();
    expect(pageLanguage(document)).toBe("java");
  });

  it("detects python from the tag list", () => {
    mountFixture();
    const tag = document.querySelector(".post-tag")!;
    tag.textContent = "python";
    expect(pageLanguage(document)).toBe("python");
  });
});
