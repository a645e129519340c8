"""Scenario-driven batch runner.

A scenario file (JSON, schema ``wcoalg.scenario/1``) names a world, an
endopolynomial in it and a list of commands.  ``run`` executes the commands
in order and produces a report (schema ``wcoalg.report/1``); the exit code
is 0 iff every check passes.
"""
from __future__ import annotations

import argparse
import concurrent.futures
import json
import random
import sys
import time
from dataclasses import dataclass, field
from importlib import resources
from typing import Any

import jsonschema

from .coalg import (
    FinCat,
    GlueSpec,
    check_one_plus_one_disjoint,
    gluing_comonad,
    internal_diagram_comonad,
)
from .engine import (
    CheckReport,
    check_characterization,
    check_coalgebra,
    check_comonad_laws,
    describe,
    initial_algebra,
    is_coalg_morphism,
)
from .errors import Exceeded, LawViolation, NotCoalgMorphism, ParseError, TypingMismatch, ValidationError, WcoalgError
from .finset import DEFAULT_BUDGET, Atom, FinFn, FinSet, element_budget
from .polynomial import Polynomial, eval_poly
from .wtype import (
    EndoPoly,
    GlueEndo,
    build_coreflexive,
    chain_objects,
    check_coreflexive,
    check_equalizer_mono_lemma,
    check_preservation,
    coalgebras_over,
    cross_check,
    diagonal_endopoly,
    diagram_coalgebra,
    diagram_map,
    finset_endopoly,
    glue_cross_check,
    glue_endopoly,
    random_equalizer_square,
    search_lemma_counterexample,
    w_type,
)

SCENARIO_SCHEMA = "wcoalg.scenario/1"
REPORT_SCHEMA = "wcoalg.report/1"
COMMANDS = ("validate", "wtype", "cross-check", "characterize", "preservation", "lemma-checks")
CHECK_LEVELS = ("touched", "touched+sampled")


def load_schema(which: str) -> dict:
    name = {"scenario": "scenario-1.json", "report": "report-1.json"}[which]
    return json.loads(resources.files("wcoalg").joinpath("schemas", name).read_text())


# ---------------------------------------------------------------------------
# scenarios


@dataclass
class Scenario:
    name: str
    world: str
    polynomial: EndoPoly
    commands: list[dict]
    budgets: dict
    category: FinCat | None = None
    glue_spec: GlueSpec | None = None
    downstairs: Polynomial | None = None
    glue: GlueEndo | None = None
    raw: dict = field(default_factory=dict, repr=False)


def set_polynomial(lit: dict) -> Polynomial:
    """A polynomial of finite sets from names."""
    I, A, B = (FinSet(Atom(x) for x in lit[k]) for k in ("I", "A", "B"))

    def fn(dom: FinSet, cod: FinSet, key: str) -> FinFn:
        table = lit[key]
        out = {}
        for x in dom:
            if x.name not in table:
                raise ValidationError(f"{key} is not defined on {x.name}", "name resolution", f"{key}.{x.name}")
            y = Atom(table[x.name])
            if y not in cod:
                raise ValidationError(f"{key} sends {x.name} to unknown {y.name}", "name resolution",
                                      f"{key}.{x.name}")
            out[x] = y
        return FinFn(dom, cod, out)

    return Polynomial(fn(A, I, "h"), fn(A, B, "g"), fn(B, I, "f"), name=lit.get("name", "P"))


def _category(lit: dict) -> FinCat:
    arrows = {k: tuple(v) for k, v in lit.get("arrows", {}).items()}
    compose = [tuple(t) for t in lit.get("compose", [])]
    return FinCat.build(lit["objects"], arrows, lit.get("identities"), compose, name=lit.get("name", "C"))


def _diagram_poly(G, C: FinCat, lit: dict) -> EndoPoly:
    objs = {o.name for o in C.objects}
    coalgs = {}
    for key in ("I", "A", "B"):
        d = lit[key]
        unknown = sorted(set(d["sets"]) - objs)
        if unknown:
            raise ValidationError(f"{key} names an unknown object", "name resolution", f"{key}.{unknown[0]}")
        sets = {o: d["sets"].get(o, []) for o in sorted(objs)}
        try:
            coalgs[key] = diagram_coalgebra(G, C, sets, d.get("actions", {}))
        except KeyError as exc:
            raise ValidationError(f"{key}: action is missing a value for {exc}", "name resolution",
                                  f"{key}.actions") from None
        except (LawViolation, TypingMismatch) as exc:
            raise ValidationError(f"{key} is not a diagram: {exc}", "functoriality", key) from None

    def nat(key, src, dst):
        m = lit[key]
        if "by_object" in m and isinstance(m["by_object"], dict):
            return diagram_map(coalgs[src], coalgs[dst], m.get("default", {}), m["by_object"])
        return diagram_map(coalgs[src], coalgs[dst], m)

    try:
        h, g, f = nat("h", "A", "I"), nat("g", "A", "B"), nat("f", "B", "I")
        return EndoPoly(G, coalgs["I"], coalgs["A"], coalgs["B"], h, g, f, name=lit.get("name", "P"))
    except KeyError as exc:
        raise ValidationError(f"a map is not defined on {exc}", "name resolution", str(exc)) from None
    except (NotCoalgMorphism, TypingMismatch) as exc:
        raise ValidationError(str(exc), "naturality", lit.get("name", "P")) from None


def _glue_poly(lit: dict) -> GlueEndo:
    def part(key):
        d = lit[key]
        return tuple(d["first"]), tuple(d["second"]), dict(d["link"])

    (I1, I2, iota), (A1, A2, alpha), (B1, B2, beta) = part("I"), part("A"), part("B")
    return GlueEndo(I1, I2, iota, A1, A2, alpha, B1, B2, beta, dict(lit["h"]), dict(lit["g"]),
                    dict(lit["f"]), name=lit.get("name", "P"))


def parse_scenario(raw: Any) -> Scenario:
    """Validate a decoded scenario document and build its objects."""
    validator = jsonschema.Draft202012Validator(load_schema("scenario"))
    errors = sorted(validator.iter_errors(raw), key=lambda e: (list(map(str, e.absolute_path)), e.message))
    if errors:
        err = errors[0]
        path = "/" + "/".join(str(p) for p in err.absolute_path)
        raise ValidationError(f"{path}: {err.message}", "scenario schema", path)
    world = raw["world"]["kind"]
    lit = raw["polynomial"]
    budgets = {"max_steps": 16, "element_budget": DEFAULT_BUDGET, "sample_seed": 0, **raw.get("budgets", {})}
    commands = [c if isinstance(c, dict) else {"run": c} for c in raw.get("commands", [])]
    name = raw.get("name", "scenario")
    shape = "set" if isinstance(lit["I"], list) else ("glued" if "first" in lit["I"] else "diagram")
    try:
        if world == "finset":
            if shape != "set":
                raise ValidationError("finset scenarios take a polynomial of sets", "world/polynomial",
                                      "/polynomial")
            p = set_polynomial(lit)
            return Scenario(name, world, finset_endopoly(p), commands, budgets, downstairs=p, raw=raw)
        if world == "diagrams":
            C = _category(raw["world"]["category"])
            G = internal_diagram_comonad(C)
            if shape == "set":
                p = set_polynomial(lit)
                return Scenario(name, world, diagonal_endopoly(p, C, G), commands, budgets, category=C,
                                downstairs=p, raw=raw)
            if shape != "diagram":
                raise ValidationError("diagram scenarios take sets or diagrams", "world/polynomial",
                                      "/polynomial")
            return Scenario(name, world, _diagram_poly(G, C, lit), commands, budgets, category=C, raw=raw)
        spec_lit = raw["world"].get("functor", {"kind": "identity"})
        spec = GlueSpec(spec_lit["kind"], spec_lit.get("k", 0), tuple(spec_lit.get("K", ())))
        if shape != "glued":
            raise ValidationError("gluing scenarios take glued polynomials", "world/polynomial", "/polynomial")
        gd = _glue_poly(lit)
        G = gluing_comonad(spec)
        try:
            ep = glue_endopoly(gd, G)
        except KeyError as exc:
            raise ValidationError(f"a map is not defined on {exc}", "name resolution", str(exc)) from None
        except (NotCoalgMorphism, TypingMismatch, LawViolation) as exc:
            raise ValidationError(str(exc), "gluing compatibility", gd.name) from None
        return Scenario(name, world, ep, commands, budgets, glue_spec=spec, glue=gd, raw=raw)
    except ValidationError:
        raise
    except (NotCoalgMorphism, TypingMismatch, LawViolation) as exc:
        raise ValidationError(str(exc), "polynomial typing", "/polynomial") from None


def loads(text: str) -> Scenario:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from None
    return parse_scenario(raw)


def load(path: str) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


# ---------------------------------------------------------------------------
# running


@dataclass(frozen=True)
class Settings:
    max_steps: int
    element_budget: int
    seed: int
    check_level: str = "touched"
    timings: bool = False

    @property
    def sampled(self) -> bool:
        return self.check_level == "touched+sampled"

    def as_dict(self) -> dict:
        return {"max_steps": self.max_steps, "element_budget": self.element_budget, "seed": self.seed,
                "check_level": self.check_level}


def settings_for(sc: Scenario, max_steps=None, budget=None, seed=None, check_level="touched",
                 timings=False) -> Settings:
    b = sc.budgets
    return Settings(b["max_steps"] if max_steps is None else max_steps,
                    b["element_budget"] if budget is None else budget,
                    b["sample_seed"] if seed is None else seed, check_level, timings)


def _expect_check(expect: dict, got: dict) -> CheckReport:
    rep = CheckReport("declared expectations")
    for key, want in sorted(expect.items()):
        rep.checked += 1
        if got.get(key) != want:
            rep.fail(f"{key} as declared", got.get(key), f"expected {want}")
    return rep


def cmd_validate(sc: Scenario, st: Settings, opts: dict):
    ep = sc.polynomial
    G = ep.G
    checks = [check_coalgebra(X) for X in (ep.I, ep.A, ep.B)]
    rep = CheckReport("endopolynomial maps are coalgebra morphisms")
    for label, m in (("h", ep.h), ("g", ep.g), ("f", ep.f)):
        rep.checked += 1
        if not is_coalg_morphism(m.src, m.dst, m.map):
            rep.fail("coalgebra morphism", label)
    checks.append(rep)
    samples = [ep.I.carrier, ep.A.carrier, ep.B.carrier]
    checks.append(check_comonad_laws(G, samples))
    checks.append(check_one_plus_one_disjoint(G))
    data = build_coreflexive(ep)
    objs = chain_objects(data.P, 2)
    if st.sampled:
        rng = random.Random(st.seed)
        pool = []
        for X in coalgebras_over(data.Gi, 1):
            pool.append(X)
            if len(pool) >= 200:
                break
        rng.shuffle(pool)
        objs += pool[:10]
    checks.append(check_coreflexive(data, objs))
    return checks, {"objects_checked": len(objs)}, None


def _wtype_data(res) -> dict:
    d = res.summary()
    d["fixed_point"] = res.report.data.get("fixed_point")
    d["well_founded"] = res.report.data.get("well_founded")
    d["chains"] = res.wfp.chains
    return d


def cmd_wtype(sc: Scenario, st: Settings, opts: dict):
    expect = dict(opts.get("expect", {}))
    want_outcome = expect.pop("outcome", "stabilized")
    targets = opts.get("targets", 5) if st.sampled else 0
    checks = []
    try:
        res = w_type(sc.polynomial, st.max_steps, sample_targets=targets, seed=st.seed)
    except Exceeded as exc:
        traces = {k: list(v) for k, v in exc.traces.items()}
        rep = CheckReport("outcome", checked=1)
        if want_outcome != "exceeded":
            rep.fail("chains stabilise within max_steps", str(exc))
        checks.append(rep)
        creation = CheckReport("lifted traces equal downstairs traces")
        for lo, up in (("Q0", "P0"), ("Q1", "P1"), ("UP", "P")):
            if lo in traces and up in traces:
                creation.checked += 1
                n = len(traces[up])
                if traces[lo][:n] != traces[up]:
                    creation.fail(f"{up} trace equals {lo} trace", (traces[lo], traces[up]))
        checks.append(creation)
        if "trace" in expect:
            rep = CheckReport("declared expectations", checked=1)
            if traces.get("UP") != expect["trace"]:
                rep.fail("trace as declared", traces.get("UP"), f"expected {expect['trace']}")
            checks.append(rep)
        return checks, {"traces": traces}, "exceeded"
    rep = CheckReport("outcome", checked=1)
    if want_outcome != "stabilized":
        rep.fail("chains do not stabilise", res.summary())
    checks.append(rep)
    checks.append(res.report)
    data = _wtype_data(res)
    if expect:
        checks.append(_expect_check(expect, data))
    return checks, data, "stabilized"


def cmd_cross_check(sc: Scenario, st: Settings, opts: dict):
    expect = dict(opts.get("expect", {}))
    if sc.world == "diagrams":
        rep, res, chain = cross_check(sc.polynomial, st.max_steps, enumerate_homs=True)
        data = dict(rep.data)
        data["W_fibers"] = data.get("pipeline_W")
        data["depth"] = data.get("direct_steps")
    elif sc.world == "gluing":
        if sc.glue_spec.kind != "identity":
            raise TypingMismatch("the staged cross-check is available for H = identity only")
        rep = glue_cross_check(sc.glue, st.max_steps, targets=opts.get("targets", 5), seed=st.seed)
        data = dict(rep.data)
        data["W_fibers"] = data.get("pipeline_W")
    else:
        rep = check_preservation("identity", sc.downstairs, st.max_steps)
        chain = initial_algebra(eval_poly(sc.downstairs), st.max_steps)
        data = dict(rep.data)
        data["W_fibers"] = data.get("target_W")
        data["depth"] = chain.steps
    checks = [rep]
    if expect:
        checks.append(_expect_check(expect, data))
    return checks, data, None


def cmd_characterize(sc: Scenario, st: Settings, opts: dict):
    n = opts.get("targets", 5)
    res = w_type(sc.polynomial, st.max_steps, sample_targets=n, seed=st.seed)
    checks = [res.report]
    data = _wtype_data(res)
    if sc.downstairs is not None and sc.world == "finset":
        chain = initial_algebra(eval_poly(sc.downstairs), st.max_steps)
        if chain.stabilized:
            from .wtype import sample_algebras
            from .coalg import small_families

            F = chain.functor
            rng = random.Random(st.seed)
            targets = sample_algebras(F, small_families(F.src.index, 2, "t"), rng, n)
            down = check_characterization(chain.algebra, targets)
            down.name = "characterization downstairs"
            checks.append(down)
    return checks, data, None


def cmd_preservation(sc: Scenario, st: Settings, opts: dict):
    if sc.world == "finset":
        rep = check_preservation("identity", sc.downstairs, st.max_steps)
    elif sc.world == "diagrams":
        lit = opts.get("downstairs")
        p = set_polynomial(lit) if lit else sc.downstairs
        if p is None:
            raise TypingMismatch("diagonal preservation needs a polynomial of sets ('downstairs')")
        rep = check_preservation("diagonal", p, st.max_steps, C=sc.category)
    else:
        if sc.glue_spec.kind != "identity":
            raise TypingMismatch("first-projection preservation is available for H = identity only")
        rep = check_preservation("first", sc.glue, st.max_steps)
    return [rep], dict(rep.data), None


def cmd_lemma_checks(sc: Scenario, st: Settings, opts: dict):
    rng = random.Random(st.seed)
    trials, size = opts.get("trials", 50), opts.get("max_size", 4)
    rep = CheckReport("equalizers with monic comparison induce pullbacks")
    for _ in range(trials):
        rep.absorb(check_equalizer_mono_lemma(random_equalizer_square(rng, size, monic=True)))
    found = search_lemma_counterexample(random.Random(st.seed + 1), opts.get("search_tries", 200), size)
    data = {"trials": trials, "non_monic_counterexample": None}
    if found is not None:
        sq, bad = found
        data["non_monic_counterexample"] = {"q": describe(sq.q), "p": describe(sq.p),
                                            "law": bad.violations[0].law}
    return [rep, check_one_plus_one_disjoint(sc.polynomial.G)], data, None


HANDLERS = {"validate": cmd_validate, "wtype": cmd_wtype, "cross-check": cmd_cross_check,
            "characterize": cmd_characterize, "preservation": cmd_preservation,
            "lemma-checks": cmd_lemma_checks}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)) and not hasattr(obj, "name"):
        return [_jsonable(v) for v in obj]
    if obj is None or isinstance(obj, (bool, int, float, str)):
        return obj
    return describe(obj)


def run(sc: Scenario, st: Settings | None = None) -> dict:
    """Execute every command; errors are recorded per command."""
    st = st or settings_for(sc)
    out = []
    with element_budget(st.element_budget):
        for opts in sc.commands:
            name = opts["run"]
            entry: dict = {"command": name}
            t0 = time.perf_counter()
            try:
                checks, data, outcome = HANDLERS[name](sc, st, opts)
                entry["ok"] = all(c.ok for c in checks)
                if outcome:
                    entry["outcome"] = outcome
                entry["checks"] = [_jsonable(c.as_dict()) for c in checks]
                entry["data"] = _jsonable(data)
            except (WcoalgError, ValueError, KeyError) as exc:
                entry.update({"ok": False, "checks": [],
                              "error": {"type": type(exc).__name__, "message": describe(str(exc))}})
            if st.timings:
                entry["seconds"] = round(time.perf_counter() - t0, 6)
            out.append(entry)
    return {"schema": REPORT_SCHEMA, "scenario": sc.name, "settings": st.as_dict(), "commands": out,
            "ok": all(e["ok"] for e in out)}


def format_text(report: dict) -> str:
    lines = [f"scenario {report['scenario']}: {'PASS' if report['ok'] else 'FAIL'}"]
    s = report["settings"]
    lines.append(f"  settings: max_steps={s['max_steps']} budget={s['element_budget']} "
                 f"seed={s['seed']} check_level={s['check_level']}")
    for e in report["commands"]:
        head = f"  [{'PASS' if e['ok'] else 'FAIL'}] {e['command']}"
        if "outcome" in e:
            head += f" ({e['outcome']})"
        if "seconds" in e:
            head += f" {e['seconds']:.3f}s"
        lines.append(head)
        if "error" in e:
            lines.append(f"      error {e['error']['type']}: {e['error']['message']}")
        for c in e.get("checks", []):
            lines.append(f"      {'ok  ' if c['ok'] else 'FAIL'} {c['name']} ({c['checked']} checked)")
            for v in c["violations"][:3]:
                detail = f" [{v['detail']}]" if v.get("detail") else ""
                lines.append(f"           law: {v['law']}; witness: {v['witness']}{detail}")
        data = e.get("data") or {}
        for key in ("W_fibers", "W0", "W1", "depth", "traces"):
            if key in data:
                lines.append(f"      {key}: {json.dumps(data[key], sort_keys=True)}")
    return "\n".join(lines) + "\n"


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, indent=2, sort_keys=True) + "\n"
    return format_text(report)


def _load_failure(path: str, exc: Exception, fmt: str) -> str:
    if fmt == "json":
        err = {"type": "OSError" if isinstance(exc, OSError) else type(exc).__name__,
               "message": describe(str(exc))}
        if isinstance(exc, ParseError) and exc.line is not None:
            err.update(line=exc.line, column=exc.column)
        if isinstance(exc, ValidationError):
            if exc.law:
                err["law"] = exc.law
            if exc.witness is not None:
                err["witness"] = describe(exc.witness)
        doc = {"schema": REPORT_SCHEMA, "file": path, "ok": False, "error": err}
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if isinstance(exc, ParseError):
        return f"{path}:{exc.line}:{exc.column}: parse error: {exc}\n"
    if isinstance(exc, ValidationError):
        return f"{path}: invalid scenario ({exc.law}; witness {describe(exc.witness)}): {exc}\n"
    return f"{path}: {exc}\n"


def _run_path(path: str, args: dict) -> tuple[int, str]:
    try:
        sc = load(path)
    except (ParseError, ValidationError, OSError) as exc:
        return 2, _load_failure(path, exc, args["format"])
    st = settings_for(sc, args["max_steps"], args["budget"], args["seed"], args["check_level"], args["timings"])
    report = run(sc, st)
    return (0 if report["ok"] else 1), render(report, args["format"])


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="wcoalg", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="action", required=True)
    r = sub.add_parser("run", help="run scenario files")
    r.add_argument("scenarios", nargs="+")
    r.add_argument("--max-steps", type=int)
    r.add_argument("--budget", type=int, help="maximum size of any constructed object")
    r.add_argument("--seed", type=int)
    r.add_argument("--format", choices=("text", "json"), default="text")
    r.add_argument("--check-level", choices=CHECK_LEVELS, default="touched")
    r.add_argument("--timings", action="store_true", help="add wall-clock seconds (breaks byte-identity)")
    r.add_argument("--jobs", type=int, default=1, help="run independent scenarios in parallel")
    v = sub.add_parser("validate", help="load scenario files and report problems")
    v.add_argument("scenarios", nargs="+")
    s = sub.add_parser("schema", help="print a JSON schema")
    s.add_argument("which", choices=("scenario", "report"))
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.action == "schema":
        sys.stdout.write(json.dumps(load_schema(args.which), indent=2) + "\n")
        return 0
    if args.action == "validate":
        status = 0
        for path in args.scenarios:
            try:
                sc = load(path)
            except ParseError as exc:
                sys.stdout.write(f"{path}:{exc.line}:{exc.column}: parse error: {exc}\n")
                status = 2
            except ValidationError as exc:
                sys.stdout.write(f"{path}: invalid ({exc.law}; witness {describe(exc.witness)}): {exc}\n")
                status = 2
            else:
                sys.stdout.write(f"{path}: ok ({sc.world}, {len(sc.commands)} commands)\n")
        return status
    opts = {k: getattr(args, k) for k in ("max_steps", "budget", "seed", "check_level", "timings", "format")}
    if args.jobs > 1 and len(args.scenarios) > 1:
        with concurrent.futures.ProcessPoolExecutor(args.jobs) as pool:
            results = list(pool.map(_run_path, args.scenarios, [opts] * len(args.scenarios)))
    else:
        results = [_run_path(p, opts) for p in args.scenarios]
    for _, text in results:
        sys.stdout.write(text)
    return max(code for code, _ in results)


if __name__ == "__main__":
    sys.exit(main())
