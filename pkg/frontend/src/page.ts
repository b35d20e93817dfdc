/** Read-only view of a Stack Overflow question page.
 *
 * Context comes straight from the DOM: the title element, the question
 * post body and the answer post body around each snippet. Only code
 * blocks inside answer bodies count as snippets; question-body blocks
 * and inline code spans never get a button.
 */

import type { ApizeRequest } from "./api";

export interface Snippet {
  answerId: number;
  code: string;
  pre: HTMLPreElement;
}

const ANSWER_CODE_BLOCKS = "#answers .answer .s-prose pre > code";

export function detectSnippets(root: Document | Element): Snippet[] {
  const snippets: Snippet[] = [];
  for (const node of root.querySelectorAll<HTMLElement>(ANSWER_CODE_BLOCKS)) {
    const pre = node.parentElement as HTMLPreElement;
    const answer = node.closest<HTMLElement>(".answer");
    const answerId = Number(answer?.dataset.answerid ?? 0) || 0;
    snippets.push({ answerId, code: node.textContent ?? "", pre });
  }
  return snippets;
}

function textOf(element: Element | null): string {
  return element?.textContent?.trim() ?? "";
}

/** java unless the question is tagged python. */
export function pageLanguage(doc: Document): "java" | "python" {
  for (const tag of doc.querySelectorAll(".post-tag")) {
    if (textOf(tag).toLowerCase() === "python") {
      return "python";
    }
  }
  return "java";
}

export function extractContext(doc: Document, snippet: Snippet): ApizeRequest {
  const answer = snippet.pre.closest<HTMLElement>(".answer");
  return {
    language: pageLanguage(doc),
    question_title: textOf(doc.querySelector("#question-header h1")),
    question_body: textOf(doc.querySelector("#question .s-prose")),
    answer_body: textOf(answer?.querySelector(".s-prose") ?? null),
    code_snippet: snippet.code.replace(/\n$/, ""),
    answer_id: snippet.answerId,
  };
}
