import { readFileSync } from "node:fs";
import { resolve } from "node:path";

import type { ApizeResult } from "../src/api";

export function loadFixturePage(): string {
  // vitest runs with the package root as cwd
  return readFileSync(resolve("tests/fixtures/so_page.html"), "utf-8");
}

export function mountFixture(): void {
  document.body.innerHTML = loadFixturePage();
}

export const WORKED_SOURCE = [
  "import java.util.ArrayList;",
  "import java.util.List;",
  "",
  "public class Chatgpt {",
  "    public static List<Integer> convertIntArrayToList(int[] arr) {",
  "        List<Integer> intList = new ArrayList<Integer>();",
  "        for (int i : arr) {",
  "            intList.add(i);",
  "        }",
  "        return intList;",
  "    }",
  "}",
].join("\n");

export function workedResult(): ApizeResult {
  return {
    method_name: "convertIntArrayToList",
    parameters: [{ type: "int[]", name: "arr" }],
    return_type: "List<Integer>",
    imports: ["java.util.ArrayList", "java.util.List"],
    throws: [],
    complete_source: WORKED_SOURCE,
    steps: { "4": "convertIntArrayToList" },
    diagnostics: [],
  };
}

export function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

export function flush(): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, 0));
}
