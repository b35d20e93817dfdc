/** Extension options. chrome.storage.sync when running as an extension,
 * localStorage as the dev/test fallback. */

export const DEFAULT_SERVICE_URL = "http://localhost:8080";

const KEY = "service_url";

interface ChromeSyncArea {
  get(defaults: Record<string, unknown>,
      callback: (items: Record<string, unknown>) => void): void;
  set(items: Record<string, unknown>, callback?: () => void): void;
}

function syncArea(): ChromeSyncArea | null {
  const chromeLike = (globalThis as Record<string, unknown>).chrome as
    | { storage?: { sync?: ChromeSyncArea } }
    | undefined;
  return chromeLike?.storage?.sync ?? null;
}

export async function loadServiceUrl(): Promise<string> {
  const area = syncArea();
  if (area) {
    return new Promise((resolve) => {
      area.get({ [KEY]: DEFAULT_SERVICE_URL }, (items) => {
        const value = items[KEY];
        resolve(typeof value === "string" && value ? value : DEFAULT_SERVICE_URL);
      });
    });
  }
  return localStorage.getItem(KEY) ?? DEFAULT_SERVICE_URL;
}

export async function saveServiceUrl(url: string): Promise<void> {
  const value = url.trim() || DEFAULT_SERVICE_URL;
  const area = syncArea();
  if (area) {
    return new Promise((resolve) => {
      area.set({ [KEY]: value }, () => resolve());
    });
  }
  localStorage.setItem(KEY, value);
}
