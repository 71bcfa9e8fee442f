"""Desugaring: distribute scenario context onto each expectation.

A scenario's bindings, extra constraints and objective form the context
in which every one of its expectations is judged.  The parser leaves
expectation context empty; desugaring copies the scenario-level context
into each expectation so later stages can treat an expectation as a
self-contained test.  Everything else passes through untouched, and the
transform is idempotent.
"""

from __future__ import annotations

from dataclasses import replace

from csx.ast import ScenarioDef, Spec


def _desugar_scenario(s: ScenarioDef) -> ScenarioDef:
    expectations = tuple(
        replace(
            e,
            bindings=s.bindings,
            extra=s.extra_constraints,
            objective=s.objective,
        )
        for e in s.expectations
    )
    return replace(s, expectations=expectations)


def desugar(spec: Spec) -> Spec:
    return replace(
        spec,
        scenario_defs=tuple(_desugar_scenario(s) for s in spec.scenario_defs),
    )
