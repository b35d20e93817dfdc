/** Client for the code2api service. The extension only ever calls
 * POST {service_url}/v1/apize. */

export interface ApiParameter {
  type: string;
  name: string;
}

export interface ApizeResult {
  method_name: string;
  parameters: ApiParameter[];
  return_type: string;
  imports: string[];
  throws: string[];
  complete_source: string;
  steps: Record<string, string>;
  diagnostics: string[];
}

export interface ApizeRequest {
  language: string;
  question_title: string;
  question_body: string;
  answer_body: string;
  code_snippet: string;
  answer_id: number;
}

/** status 0 means the service could not be reached at all. */
export class ApizeError extends Error {
  readonly status: number;

  constructor(status: number, message: string) {
    super(message);
    this.name = "ApizeError";
    this.status = status;
  }
}

async function errorDetail(response: Response): Promise<string> {
  try {
    const body = (await response.json()) as { detail?: string };
    if (body && typeof body.detail === "string") {
      return body.detail;
    }
  } catch {
    // non-JSON error body; fall through
  }
  return response.statusText || `service returned ${response.status}`;
}

export async function apize(
  serviceUrl: string,
  request: ApizeRequest,
): Promise<ApizeResult> {
  const base = serviceUrl.replace(/\/+$/, "");
  const url = `${base}/v1/apize`;
  let response: Response;
  try {
    response = await fetch(url, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(request),
    });
  } catch {
    throw new ApizeError(0, `service unreachable at ${base}`);
  }
  if (!response.ok) {
    throw new ApizeError(response.status, await errorDetail(response));
  }
  return (await response.json()) as ApizeResult;
}
