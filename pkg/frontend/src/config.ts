/** Service location. Injected at build time as the single BASE_URL
 * variable (e.g. `--define:__BASE_URL__='"https://…"'`); falls back to
 * the BASE_URL environment variable and then to the local default. */
declare const __BASE_URL__: string | undefined;

export const BASE_URL: string =
  typeof __BASE_URL__ !== "undefined"
    ? __BASE_URL__
    : (typeof process !== "undefined" && process.env?.BASE_URL) ||
      "http://127.0.0.1:8000";
