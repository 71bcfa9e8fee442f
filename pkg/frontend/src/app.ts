/**
 * csx-studio page wiring. All domain logic lives in the tested modules
 * (form, tree, history, solve, hover); this file only moves DOM events in
 * and render calls out.
 */

import {
  ApiError,
  CsxClient,
  type DeviceSchema,
  type SolveResponse,
  type Value,
  type WorkspaceSummary,
} from "./api.js";
import {
  buildForm,
  canSolve,
  fixedPaths,
  setControl,
  setObjective,
  toSolveRequest,
  type ControlState,
  type JobFormState,
} from "./form.js";
import { ExplorationHistory, type HistoryEntry } from "./history.js";
import { hoverValue } from "./hover.js";
import { SolveCoordinator } from "./solve.js";
import { buildTree, renderText, type TreeViewNode } from "./tree.js";
import { mm, withMm } from "./units.js";

const client = new CsxClient("");
const history = new ExplorationHistory();
const coordinator = new SolveCoordinator(client, history);

let workspace: WorkspaceSummary | null = null;
let devices: DeviceSchema[] = [];
let form: JobFormState | null = null;
let lastShown: SolveResponse | null = null;

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  ...children: (Node | string)[]
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [k, v] of Object.entries(attrs)) {
    if (k === "class") node.className = v;
    else node.setAttribute(k, v);
  }
  node.append(...children);
  return node;
}

function byId<T extends HTMLElement>(id: string): T {
  return document.getElementById(id) as T;
}

function banner(text: string, kind: "error" | "warn" | "ok" | "none"): void {
  const box = byId<HTMLDivElement>("banner");
  box.textContent = text;
  box.className = kind === "none" ? "banner hidden" : `banner ${kind}`;
}

async function loadWorkspace(): Promise<void> {
  const source = byId<HTMLTextAreaElement>("spec-source").value;
  try {
    workspace = await client.putWorkspace({ "studio.csx": source });
  } catch (err) {
    if (err instanceof ApiError) {
      banner(
        [err.message, ...err.diagnostics].join("\n"),
        "error",
      );
      return;
    }
    banner(String(err), "error");
    return;
  }
  if (!workspace.ok) {
    banner(workspace.diagnostics.join("\n"), "error");
  } else {
    banner(`workspace ${workspace.id} revision ${workspace.revision}`, "ok");
  }
  const res = await client.getDevices(workspace.id);
  devices = res.devices.filter((d) => !d.tainted);
  const picker = byId<HTMLSelectElement>("device-picker");
  picker.replaceChildren(
    ...devices.map((d) => el("option", { value: d.name }, d.name)),
  );
  picker.disabled = devices.length === 0;
  if (devices.length > 0) {
    pickDevice(devices[0]!.name);
  } else {
    form = null;
    renderForm();
  }
  renderInhabitance();
}

function renderInhabitance(): void {
  const list = byId<HTMLUListElement>("definitions");
  list.replaceChildren(
    ...(workspace?.definitions ?? []).map((d) =>
      el(
        "li",
        { class: `inhab-${d.inhabitance}` },
        `${d.kind} ${d.name}: ${d.inhabitance}`,
      ),
    ),
  );
}

function pickDevice(name: string): void {
  const schema = devices.find((d) => d.name === name);
  form = schema ? buildForm(schema) : null;
  lastShown = null;
  renderForm();
  renderOutcome(null);
}

function controlRow(
  name: string,
  sort: "int" | "bool",
  state: ControlState,
  value: Value | null,
): HTMLElement {
  const stateSel = el("select", { "data-control": name });
  for (const s of ["unset", "fixed", "expected"] as const) {
    const opt = el("option", { value: s }, s);
    if (s === state) opt.selected = true;
    stateSel.append(opt);
  }
  stateSel.addEventListener("change", () => {
    applyControl(name, stateSel.value as ControlState);
  });

  let input: HTMLElement;
  if (sort === "bool") {
    const box = el("input", { type: "checkbox" }) as HTMLInputElement;
    box.checked = value === true;
    box.disabled = state === "unset";
    box.addEventListener("change", () => {
      applyControl(name, stateSel.value as ControlState, box.checked);
    });
    input = box;
  } else {
    const num = el("input", {
      type: "number",
      step: "1",
      placeholder: "tenths of mm",
    }) as HTMLInputElement;
    if (value !== null) num.value = String(value);
    num.disabled = state === "unset";
    num.addEventListener("change", () => {
      const parsed = Number(num.value);
      if (Number.isInteger(parsed)) {
        applyControl(name, stateSel.value as ControlState, parsed);
      }
    });
    input = num;
  }

  const hint =
    sort === "int" && typeof value === "number" ? `= ${mm(value)} mm` : "";
  return el(
    "div",
    { class: `control state-${state}` },
    el("span", { class: "leaf-name" }, name),
    stateSel,
    input,
    el("span", { class: "mm-hint" }, hint),
  );
}

function applyControl(name: string, state: ControlState, value?: Value): void {
  if (!form) return;
  form = setControl(form, name, state, value);
  renderForm();
}

function renderForm(): void {
  const host = byId<HTMLDivElement>("job-form");
  const solveBtn = byId<HTMLButtonElement>("solve-btn");
  if (!form) {
    host.replaceChildren(el("p", {}, "no device selected"));
    solveBtn.disabled = true;
    return;
  }
  host.replaceChildren(
    ...form.controls.map((c) =>
      controlRow(c.leaf.name, c.leaf.sort, c.state, c.value),
    ),
  );
  solveBtn.disabled = !canSolve(form) || coordinator.busy(form.device);
}

function objectiveFromInputs(): void {
  if (!form) return;
  const sense = byId<HTMLSelectElement>("objective-sense").value as
    | "none"
    | "minimize"
    | "maximize";
  const expr = byId<HTMLInputElement>("objective-expr").value;
  form = setObjective(form, sense, expr);
}

async function runSolve(): Promise<void> {
  if (!form || !workspace) return;
  objectiveFromInputs();
  const device = form.device;
  const req = toSolveRequest(form, workspace.revision);
  renderForm(); // disables the button while busy
  let res: SolveResponse | null;
  try {
    res = await coordinator.solve(workspace.id, req);
  } catch (err) {
    banner(err instanceof ApiError ? err.message : String(err), "error");
    renderForm();
    return;
  }
  renderForm();
  if (res === null) {
    return; // superseded by a newer submission
  }
  if (form.device === device) {
    lastShown = res;
    renderOutcome(res);
  }
  renderHistory();
}

function treeDom(nodes: TreeViewNode[]): HTMLElement {
  const list = el("ul", { class: "config-tree" });
  for (const node of nodes) {
    if (node.kind === "group") {
      const details = el(
        "details",
        { open: "" },
        el("summary", {}, node.name),
        treeDom(node.children),
      );
      list.append(el("li", {}, details));
    } else {
      const row = el(
        "li",
        { class: `leaf ${node.provenance}` },
        el("span", { class: "leaf-name" }, node.name),
        " = ",
        el("span", { class: "leaf-value" }, node.display),
        el(
          "span",
          { class: "provenance" },
          node.provenance === "chosen" ? "solver" : "you",
        ),
      );
      row.addEventListener("mouseenter", () => showHover(node.path, row));
      list.append(row);
    }
  }
  return list;
}

function renderOutcome(res: SolveResponse | null): void {
  const host = byId<HTMLDivElement>("outcome");
  if (!res || !form) {
    host.replaceChildren();
    return;
  }
  const parts: (Node | string)[] = [];
  if (res.status === "empty") {
    parts.push(
      el(
        "p",
        { class: "empty-space" },
        "no possible configuration for these settings",
      ),
    );
    const prev = history.lastFound(form.device);
    if (prev) {
      parts.push(
        el(
          "p",
          { class: "note" },
          `last good configuration is kept in history (entry ${prev.seq})`,
        ),
      );
    }
  } else {
    if (res.status === "exhausted") {
      parts.push(
        el(
          "p",
          { class: "budget-warning" },
          res.configuration
            ? "search budget exhausted; showing best incumbent found"
            : "search budget exhausted before any configuration was found",
        ),
      );
    }
    if (res.objective !== null) {
      parts.push(
        el("p", { class: "objective-badge" }, `objective = ${res.objective}`),
      );
    }
    if (res.configuration) {
      const schema = devices.find((d) => d.name === form!.device);
      const nodes = buildTree(
        res.configuration,
        schema?.leaves ?? [],
        fixedPaths(form),
      );
      parts.push(treeDom(nodes));
      parts.push(
        el("pre", { class: "tree-text hidden" }, renderText(nodes)),
      );
    }
  }
  host.replaceChildren(...parts);
}

let hoverTimer: number | undefined;

function showHover(path: string, anchor: HTMLElement): void {
  if (!form || !workspace) return;
  const device = form.device;
  window.clearTimeout(hoverTimer);
  hoverTimer = window.setTimeout(async () => {
    const text = await hoverValue(client, workspace!.id, device, path);
    const pop = byId<HTMLDivElement>("hover-pop");
    pop.textContent = `${path} = ${text}`;
    const rect = anchor.getBoundingClientRect();
    pop.style.left = `${rect.left + window.scrollX}px`;
    pop.style.top = `${rect.bottom + window.scrollY + 4}px`;
    pop.classList.remove("hidden");
    window.setTimeout(() => pop.classList.add("hidden"), 2500);
  }, 150);
}

function renderHistory(): void {
  const host = byId<HTMLOListElement>("history");
  host.replaceChildren(
    ...history.all().map((entry) => historyRow(entry)),
  );
}

function historyRow(entry: HistoryEntry): HTMLElement {
  const summary =
    `${entry.request.device}: ${entry.outcome.status}` +
    (entry.outcome.objective !== null
      ? `, objective ${entry.outcome.objective}`
      : "") +
    ` (${entry.request.bindings.length} bindings)`;
  const btn = el("button", {}, "replay");
  const mark = el("span", { class: "replay-mark" });
  btn.addEventListener("click", async () => {
    if (!workspace) return;
    const { matches } = await history.replay(client, workspace.id, entry);
    mark.textContent = matches ? "reproduced" : "diverged";
    mark.className = matches ? "replay-mark ok" : "replay-mark warn";
  });
  return el("li", {}, `#${entry.seq} ${summary} `, btn, mark);
}

export function wire(): void {
  byId<HTMLButtonElement>("load-btn").addEventListener("click", () => {
    void loadWorkspace();
  });
  byId<HTMLSelectElement>("device-picker").addEventListener("change", (e) => {
    pickDevice((e.target as HTMLSelectElement).value);
  });
  byId<HTMLButtonElement>("solve-btn").addEventListener("click", () => {
    void runSolve();
  });
  const evalBtn = byId<HTMLButtonElement>("eval-btn");
  evalBtn.addEventListener("click", async () => {
    if (!form || !workspace) return;
    const expr = byId<HTMLInputElement>("eval-expr").value;
    const text = await hoverValue(client, workspace.id, form.device, expr);
    byId<HTMLSpanElement>("eval-result").textContent = text;
  });
}

if (typeof document !== "undefined" && document.getElementById("load-btn")) {
  wire();
}
