/**
 * Configuration tree view model.
 *
 * Built exclusively from a solve response's configuration payload: form
 * state contributes only provenance (which paths the operator had pinned),
 * never values, so the view cannot show a number the service did not send.
 */

import type { Configuration, LeafSchema, Value } from "./api.js";
import { displayValue } from "./units.js";

export type Provenance = "fixed" | "chosen";

export interface ValueNode {
  kind: "value";
  name: string;
  path: string;
  value: Value;
  sort: "int" | "bool";
  provenance: Provenance;
  display: string;
}

export interface GroupNode {
  kind: "group";
  name: string;
  path: string;
  children: TreeViewNode[];
}

export type TreeViewNode = ValueNode | GroupNode;

function sortOf(
  leafSorts: Map<string, "int" | "bool">,
  path: string,
  value: Value,
): "int" | "bool" {
  return leafSorts.get(path) ?? (typeof value === "boolean" ? "bool" : "int");
}

/**
 * Shape a configuration for rendering. `fixed` holds the dotted paths the
 * operator pinned in the job form; every other leaf was chosen by the
 * solver and is flagged so the view can highlight it.
 */
export function buildTree(
  config: Configuration,
  leaves: LeafSchema[],
  fixed: ReadonlySet<string>,
): TreeViewNode[] {
  const leafSorts = new Map<string, "int" | "bool">(
    leaves.map((l) => [l.path.join("."), l.sort]),
  );

  function walk(
    name: string,
    prefix: string,
    value: Value | { [k: string]: unknown },
  ): TreeViewNode {
    const path = prefix === "" ? name : `${prefix}.${name}`;
    if (typeof value === "object" && value !== null) {
      return {
        kind: "group",
        name,
        path,
        children: Object.entries(value).map(([k, v]) =>
          walk(k, path, v as Value | { [k: string]: unknown }),
        ),
      };
    }
    const sort = sortOf(leafSorts, path, value);
    return {
      kind: "value",
      name,
      path,
      value,
      sort,
      provenance: fixed.has(path) ? "fixed" : "chosen",
      display: displayValue(value, sort),
    };
  }

  return Object.entries(config.tree).map(([k, v]) =>
    walk(k, "", v as Value | { [k: string]: unknown }),
  );
}

/** Plain-text rendering, used by tests and as a debugging aid. */
export function renderText(nodes: TreeViewNode[], indent = 0): string {
  const pad = "  ".repeat(indent);
  const lines: string[] = [];
  for (const node of nodes) {
    if (node.kind === "group") {
      lines.push(`${pad}${node.name}`);
      const body = renderText(node.children, indent + 1);
      if (body !== "") {
        lines.push(body);
      }
    } else {
      const marker = node.provenance === "chosen" ? " *" : "";
      lines.push(`${pad}${node.name} = ${node.display}${marker}`);
    }
  }
  return lines.join("\n");
}

/** All value nodes in render order, for assertions and summaries. */
export function valueNodes(nodes: TreeViewNode[]): ValueNode[] {
  const out: ValueNode[] = [];
  for (const node of nodes) {
    if (node.kind === "group") {
      out.push(...valueNodes(node.children));
    } else {
      out.push(node);
    }
  }
  return out;
}
