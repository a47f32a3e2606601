import { ApiClient } from "./api.js";
import { categoryRows, loadDashboard } from "./dashboard.js";
import { setRationaleContext, toggleCategory } from "./form.js";
import { keyBindings } from "./keys.js";
import { AnnotationSession } from "./session.js";
import { RATIONALE } from "./types.js";

function el(tag: string, className: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  node.className = className;
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}

function renderSession(root: HTMLElement, session: AnnotationSession): void {
  root.replaceChildren();
  if (session.view === "complete" || session.form === null) {
    root.append(
      el("h2", "done", "Round complete"),
      el("p", "tally", `You annotated ${session.submitted} sentences.`),
    );
    return;
  }
  const form = session.form;
  const bindings = keyBindings(session.categories);

  for (const neighbor of session.neighbors()) {
    if (neighbor.position < form.sentence.position) {
      root.append(el("p", "context", neighbor.text));
    }
  }
  root.append(el("p", "sentence", form.sentence.text));
  for (const neighbor of session.neighbors()) {
    if (neighbor.position > form.sentence.position) {
      root.append(el("p", "context", neighbor.text));
    }
  }

  const list = el("ul", "categories");
  for (const category of session.categories) {
    const item = el("li", "category");
    const key = [...bindings.entries()].find(
      ([, name]) => name === category.name,
    )?.[0];
    const checked = form.labels[category.name] === 1 ? "[x]" : "[ ]";
    const disabled =
      category.name === RATIONALE && !form.rationaleEnabled
        ? " (requires a positive or negative mark)"
        : "";
    item.textContent =
      `${checked} ${key ?? " "} ${category.display_name}${disabled}`;
    item.title = category.description; // expandable codebook help
    list.append(item);
  }
  root.append(list);

  if (form.labels[RATIONALE] === 1) {
    const context = form.rationaleContext;
    root.append(
      el(
        "p",
        "rationale-context",
        `c: rationale needs surrounding context? ${
          context === null ? "unset" : context === 1 ? "yes" : "no"
        }`,
      ),
    );
  }
  if (form.error !== null) {
    root.append(el("p", "error", form.error));
  }
  root.append(el("p", "hint", "Enter: submit and advance"));
}

async function renderDashboard(
  root: HTMLElement,
  api: ApiClient,
  roundId: string,
): Promise<void> {
  const state = await loadDashboard(api, roundId);
  root.replaceChildren();
  root.append(
    el("h2", "round", `Round ${state.progress.round_id}`),
    el(
      "p",
      "progress",
      `${state.progress.submitted} submissions, ` +
        `${state.progress.complete_sentences} complete sentences, ` +
        `${state.agreement.pending_sentences} pending`,
    ),
  );
  const table = el("table", "agreement");
  for (const row of categoryRows(state)) {
    const tr = el("tr", "agreement-row");
    tr.append(
      el("td", "name", row.category),
      el("td", "full", String(row.full_agreement_rate)),
      el("td", "majority", String(row.prevalence_majority)),
      el("td", "full-prev", String(row.prevalence_full)),
    );
    table.append(tr);
  }
  root.append(table);
}

export async function boot(root: HTMLElement): Promise<void> {
  const params = new URLSearchParams(window.location.search);
  const roundId = params.get("round") ?? "";
  const api = new ApiClient();

  if (params.get("view") === "dashboard") {
    await renderDashboard(root, api, roundId);
    window.setInterval(() => renderDashboard(root, api, roundId), 5000);
    return;
  }

  const annotator = params.get("annotator") ?? "";
  const session = new AnnotationSession(api, roundId, annotator);
  await session.start();
  renderSession(root, session);

  document.addEventListener("keydown", async (event) => {
    if (session.form === null) {
      return;
    }
    const bindings = keyBindings(session.categories);
    const category = bindings.get(event.key);
    if (category !== undefined) {
      session.form = toggleCategory(session.form, category);
    } else if (event.key === "c") {
      const current = session.form.rationaleContext;
      session.form = setRationaleContext(
        session.form,
        current === null ? 1 : current === 1 ? 0 : null,
      );
    } else if (event.key === "Enter") {
      await session.submitAndAdvance();
    } else {
      return;
    }
    renderSession(root, session);
  });
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  void boot(document.getElementById("app") as HTMLElement);
}
