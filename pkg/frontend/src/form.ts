/**
 * Job form model: one control per primitive leaf of the chosen device.
 *
 * Controls are tri-state. "unset" leaves the variable free for the solver;
 * "fixed" pins it to an operator-entered value (a machine setting or a
 * known input); "expected" also pins it but marks it as a desired output,
 * which the configuration view reports separately. Only set controls
 * contribute bindings to the solve request.
 */

import type {
  Binding,
  DeviceSchema,
  LeafSchema,
  SolveRequest,
  Value,
} from "./api.js";

export type ControlState = "unset" | "fixed" | "expected";

export interface Control {
  leaf: LeafSchema;
  state: ControlState;
  value: Value | null;
}

export type ObjectiveSense = "none" | "minimize" | "maximize";

export interface JobFormState {
  device: string;
  controls: Control[];
  objective: { sense: ObjectiveSense; expr: string };
}

/** Fresh form for a device: every leaf exactly once, everything unset. */
export function buildForm(schema: DeviceSchema): JobFormState {
  const leaves = schema.leaves ?? [];
  return {
    device: schema.name,
    controls: leaves.map((leaf) => ({ leaf, state: "unset", value: null })),
    objective: { sense: "none", expr: "" },
  };
}

/** Dotted path of a control, the shape the service's bindings expect. */
export function controlPath(control: Control): string {
  return control.leaf.path.join(".");
}

function parseValue(leaf: LeafSchema, raw: Value): Value | null {
  if (leaf.sort === "bool") {
    return typeof raw === "boolean" ? raw : null;
  }
  return typeof raw === "number" && Number.isInteger(raw) ? raw : null;
}

/**
 * Return a new form with one control changed. Unknown names and
 * sort-mismatched values leave the form untouched so a stray event can
 * never corrupt a job.
 */
export function setControl(
  form: JobFormState,
  name: string,
  state: ControlState,
  value?: Value,
): JobFormState {
  const controls = form.controls.map((c) => {
    if (c.leaf.name !== name) {
      return c;
    }
    if (state === "unset") {
      return { ...c, state, value: null };
    }
    const parsed = value === undefined ? c.value : parseValue(c.leaf, value);
    if (parsed === null) {
      return c;
    }
    return { ...c, state, value: parsed };
  });
  return { ...form, controls };
}

export function setObjective(
  form: JobFormState,
  sense: ObjectiveSense,
  expr: string,
): JobFormState {
  return { ...form, objective: { sense, expr } };
}

/** Bindings from the set controls only. */
export function formBindings(form: JobFormState): Binding[] {
  const out: Binding[] = [];
  for (const c of form.controls) {
    if (c.state !== "unset" && c.value !== null) {
      out.push({ path: controlPath(c), value: c.value });
    }
  }
  return out;
}

/** Paths the operator pinned, for provenance marking in the tree view. */
export function fixedPaths(form: JobFormState): Set<string> {
  return new Set(formBindings(form).map((b) => b.path));
}

/** An empty device has nothing to solve for. */
export function canSolve(form: JobFormState): boolean {
  return form.controls.length > 0;
}

export function toSolveRequest(
  form: JobFormState,
  revision?: number,
): SolveRequest {
  const req: SolveRequest = {
    device: form.device,
    bindings: formBindings(form),
  };
  if (form.objective.sense !== "none" && form.objective.expr.trim() !== "") {
    req.objective = {
      sense: form.objective.sense,
      expr: form.objective.expr.trim(),
    };
  }
  if (revision !== undefined) {
    req.revision = revision;
  }
  return req;
}
