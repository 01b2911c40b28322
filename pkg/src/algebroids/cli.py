"""Batch front end: ``algebroids run problem.json``.

Exit codes: 0 all checks pass, 1 some check failed, 2 malformed input
(schema, reference or expression error), 3 mathematical precondition
violated (Maurer-Cartan, invalid Lie data, non-closed twist, bad transitions),
4 internal invariant breach.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources

import jsonschema

from . import cech, courant, liestruct, vertex
from .report import Report
from .symcalc import Chart, ChartError, DiffForm, ParseError, Substitution, d, parse_expr, parse_form

EXIT_OK, EXIT_FAIL, EXIT_SCHEMA, EXIT_PRECONDITION, EXIT_INTERNAL = 0, 1, 2, 3, 4

PRECONDITION_ERRORS = (liestruct.MaurerCartanError, liestruct.LieSpecError, courant.CourantError,
                       vertex.VertexError, cech.NerveError, ZeroDivisionError)


class ProblemError(ValueError):
    """Malformed problem file: schema violation, dangling reference or bad expression."""

    def __init__(self, message, where="", position=None):
        self.where = where
        self.position = position
        super().__init__(message)


def load_schema(name):
    text = resources.files("algebroids").joinpath("schemas", name).read_text(encoding="utf-8")
    return json.loads(text)


def validate_problem(doc):
    validator = jsonschema.Draft202012Validator(load_schema("problem.schema.json"))
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        where = "/".join(str(p) for p in e.absolute_path) or "<root>"
        raise ProblemError(f"schema violation: {e.message}", where)


def validate_report(doc):
    jsonschema.validate(doc, load_schema("report.schema.json"))


def _simplex(key):
    try:
        return tuple(sorted(int(p) for p in str(key).split("-")))
    except ValueError:
        raise ProblemError(f"bad simplex key {key!r} (expected e.g. '0-1')", str(key)) from None


def _frac(x, where):
    try:
        return Fraction(x)
    except (ValueError, ZeroDivisionError):
        raise ProblemError(f"bad rational {x!r}", where) from None


# -- problem context ------------------------------------------------------------------------------

class Problem:
    """Lazily resolved objects of a validated problem file."""

    def __init__(self, doc):
        self.doc = doc
        self._cache = {}

    def _section(self, section, name):
        entries = self.doc.get(section, {})
        if name not in entries:
            raise ProblemError(f"unknown {section} entry {name!r}", section)
        return entries[name]

    def _memo(self, key, build):
        if key not in self._cache:
            self._cache[key] = build()
        return self._cache[key]

    def _parse(self, fn, text, chart, where, *args):
        try:
            return fn(text, chart, *args)
        except ParseError as exc:
            raise ProblemError(f"{exc.message} in {text!r}", where, exc.position) from None

    def chart(self, name):
        def build():
            spec = self._section("charts", name)
            try:
                return Chart(name, spec["vars"], spec.get("params", ()), spec.get("units", ()))
            except ChartError as exc:
                raise ProblemError(str(exc), f"charts/{name}") from None
        return self._memo(("chart", name), build)

    def lie(self, name, n=None):
        def build():
            spec = self._section("lie_algebras", name)
            where = f"lie_algebras/{name}"
            if "builtin" in spec:
                lie = liestruct.builtin(spec["builtin"], spec.get("n", n))
                if "gram_scale" in spec:
                    lie = lie.scaled(_frac(spec["gram_scale"], where))
                return lie
            basis = spec["basis"]
            index = {b: i for i, b in enumerate(basis)}

            def idx(b):
                if b not in index:
                    raise ProblemError(f"unknown basis vector {b!r}", where)
                return index[b]
            brackets = [(idx(e["a"]), idx(e["b"]),
                         {idx(k): _frac(v, where) for k, v in e["result"].items()})
                        for e in spec["brackets"]]
            gram = [[_frac(x, where) for x in row] for row in spec["gram"]]
            mats = [[[_frac(x, where) for x in row] for row in m] for m in spec.get("matrices", [])]
            return liestruct.LieAlgebraSpec.from_sparse(name, basis, brackets, gram, mats)
        return self._memo(("lie", name, n), build)

    def form(self, text, chart, degree, where):
        return self._parse(parse_form, text, chart, where, degree)

    def expr(self, text, chart, where):
        return self._parse(parse_expr, text, chart, where)

    def matrix(self, rows, chart, where):
        return [[self.expr(x, chart, where) for x in row] for row in rows]

    def gauge(self, name, chart=None):
        def build():
            spec = self._section("gauges", name)
            where = f"gauges/{name}"
            ch = self.chart(spec["chart"])
            lie = self.lie(spec["lie"], ch.n)
            if "pure" in spec:
                g = self.matrix(spec["pure"], ch, where)
                return liestruct.maurer_cartan_form(g, lie, ch)
            terms = []
            for b, text in spec["components"].items():
                if b not in lie.basis:
                    raise ProblemError(f"unknown basis vector {b!r}", where)
                terms.append((self.form(text, ch, 1, where), b))
            return liestruct.GForm.from_terms(ch, lie, 1, terms)
        a = self._memo(("gauge", name), build)
        return a if chart is None else a.lift(chart)

    def twist(self, spec, chart, where):
        if "H" not in spec:
            return None
        return self.form(spec["H"], chart, 3, where)

    def courant(self, name):
        def build():
            spec = self._section("courant", name)
            where = f"courant/{name}"
            ch = self.chart(spec["chart"])
            Q = courant.CourantStruct(ch, self.twist(spec, ch, where), check=spec.get("check", True))
            if "lie" not in spec:
                return Q
            lie = self.lie(spec["lie"], ch.n)
            a = self.gauge(spec["gauge"], ch) if "gauge" in spec else None
            return courant.ext_build(lie, a, Q)
        return self._memo(("courant", name), build)

    def vertex(self, name):
        def build():
            spec = self._section("vertex", name)
            where = f"vertex/{name}"
            ch = self.chart(spec["chart"])
            lie = self.lie(spec["lie"], ch.n) if "lie" in spec else None
            a = self.gauge(spec["gauge"], ch) if "gauge" in spec else None
            return vertex.VertexStruct(ch, self.twist(spec, ch, where), lie, a)
        return self._memo(("vertex", name), build)

    def nerve(self, name):
        def build():
            spec = self._section("nerve", name)
            where = f"nerve/{name}"
            if spec["kind"] == "tetrahedron":
                return cech.tetrahedron_nerve(self.chart(spec["chart"]), spec.get("boundary", False))
            if spec["kind"] == "p1xp1":
                return cech.p1xp1_atlas()
            charts = {_simplex(k): self.chart(v) for k, v in spec["charts"].items()}
            restr = {}
            for r in spec["restrictions"]:
                src, tgt = _simplex(r["from"]), _simplex(r["to"])
                if src not in charts or tgt not in charts:
                    raise ProblemError(f"restriction {r['from']}->{r['to']} uses a simplex without chart",
                                       where)
                assign = {v: self.expr(t, charts[tgt], where) for v, t in r["assign"].items()}
                try:
                    restr[(src, tgt)] = Substitution(charts[src], charts[tgt], assign)
                except ChartError as exc:
                    raise ProblemError(str(exc), where) from None
            return cech.CoverNerve(name, charts, [tuple(s) for s in spec["simplices"]], restr)
        return self._memo(("nerve", name), build)

    def transitions(self, name):
        def build():
            spec = self._section("transitions", name)
            where = f"transitions/{name}"
            nerve = self.nerve(spec["nerve"])
            if "line_bundle" in spec:
                if self.doc["nerve"][spec["nerve"]]["kind"] != "p1xp1":
                    raise ProblemError("line_bundle transitions need the p1xp1 nerve", where)
                return nerve, cech.p1xp1_line_bundle(nerve, *spec["line_bundle"])
            out = {}
            for key, rows in spec["matrices"].items():
                s = _simplex(key)
                if len(s) != 2 or not nerve.has(s):
                    raise ProblemError(f"{key!r} is not an edge of the nerve", where)
                out[s] = self.matrix(rows, nerve.chart(s), where)
            missing = [s for s in nerve.simplices(1) if s not in out]
            if missing:
                raise ProblemError(f"no transition for edges {missing}", where)
            return nerve, out
        return self._memo(("transitions", name), build)


# -- tasks ---------------------------------------------------------------------------------------

@dataclass
class TaskResult:
    id: str
    kind: str
    status: str
    report: Report
    result: dict = field(default_factory=dict)
    seconds: float = 0.0

    def to_dict(self):
        return {"id": self.id, "kind": self.kind, "status": self.status,
                "checks": [c.to_dict() for c in self.report.checks], "result": self.result}


def _need(task, key):
    if key not in task:
        raise ProblemError(f"task {task['id']!r} ({task['kind']}) needs {key!r}", f"tasks/{task['id']}")
    return task[key]


def _status(rep):
    return "pass" if rep.passed else "fail"


class Runner:
    def __init__(self, problem, degree_bound=2, require_coboundary=False):
        self.p = problem
        self.degree_bound = degree_bound
        self.require_coboundary = require_coboundary
        self.cocycles = {}

    def degree(self, task):
        return task.get("degree", self.degree_bound)

    def exact(self, name):
        Q = self.p.courant(name)
        if not isinstance(Q, courant.CourantStruct):
            raise ProblemError(f"{name!r} is an extension, not an exact Courant structure", "courant")
        return Q

    def extension(self, name):
        E = self.p.courant(name)
        if not isinstance(E, courant.CourantExt):
            raise ProblemError(f"{name!r} is not a Courant extension (give lie and gauge)", "courant")
        return E

    def cocycle(self, task):
        key = _need(task, "cocycle")
        if key not in self.cocycles:
            raise ProblemError(f"task {task['id']!r} refers to {key!r}, which produced no cocycle",
                               f"tasks/{task['id']}")
        return self.cocycles[key]

    def _expect(self, rep, task, value, chart, degree):
        if "expect" in task:
            want = self.p.form(task["expect"], chart, degree, f"tasks/{task['id']}/expect")
            rep.add("expected", value - want.lift(value.chart))

    def run(self, task):
        kind = task["kind"]
        handler = getattr(self, "task_" + kind.replace("-", "_"))
        return handler(task)

    def task_check_courant(self, task):
        rep = courant.courant_axiom_suite(self.exact(_need(task, "courant")), self.degree(task),
                                          slice_last=True)
        return _status(rep), rep, {}

    def task_check_ext(self, task):
        rep = courant.ext_axiom_suite(self.extension(_need(task, "courant")), self.degree(task),
                                      slice_last=True)
        return _status(rep), rep, {}

    def task_check_vertex(self, task):
        rep = vertex.nine_axiom_suite(self.p.vertex(_need(task, "vertex")), self.degree(task),
                                      slice_last=True)
        return _status(rep), rep, {}

    def task_curvature(self, task):
        Q = self.exact(_need(task, "courant"))
        rep = Report("curvature")
        if "connection" in task:
            alpha = self.p.form(task["connection"], Q.chart, 2, f"tasks/{task['id']}/connection")
            nabla = courant.ConnectionQ.from_form(alpha)
        else:
            alpha = DiffForm.zero(Q.chart, 2)
            nabla = courant.ConnectionQ.zero(Q.chart)
        c = courant.curvature(Q, nabla)
        rep.add("closed", d(c))
        rep.add("shift-law", c - Q.H - d(alpha))
        self._expect(rep, task, c, Q.chart, 3)
        return _status(rep), rep, {"curvature": str(c)}

    def task_mc_check(self, task):
        a = self.p.gauge(_need(task, "gauge"))
        rep = Report("maurer-cartan")
        rep.add("maurer-cartan", liestruct.mc_residual(a))
        return _status(rep), rep, {}

    def task_triple(self, task):
        a = self.p.gauge(_need(task, "gauge"))
        rep = Report("triple product")
        rep.add("maurer-cartan", liestruct.mc_residual(a))
        T = liestruct.triple(a)
        rep.add("closed", d(T))
        self._expect(rep, task, T, a.chart, 3)
        return _status(rep), rep, {"triple": str(T), "pointwise": str(liestruct.pointwise_triple(a))}

    def task_sum(self, task):
        left, right = _need(task, "left"), _need(task, "right")
        Q2 = self.exact(right)
        if left in self.p.doc.get("vertex", {}):
            W, rep = vertex.vsum_check(self.p.vertex(left), Q2, self.degree(task))
            H = W.H
        else:
            L = self.p.courant(left)
            rep = Report("sum")
            if isinstance(L, courant.CourantExt):
                H = courant.ext_sum(L, Q2).H
            else:
                H = courant.sum_exact(L, Q2).H
            rep.add("twist-adds", H - L.H - Q2.H)
        self._expect(rep, task, H, H.chart, 3)
        return _status(rep), rep, {"twist": str(H)}

    def task_ext_diff(self, task):
        E2, E1 = self.extension(_need(task, "left")), self.extension(_need(task, "right"))
        Q, rep = courant.ext_difference_check(E2, E1, self.degree(task))
        self._expect(rep, task, Q.H, Q.chart, 3)
        return _status(rep), rep, {"twist": str(Q.H)}

    def task_change_conn(self, task):
        E = self.extension(_need(task, "courant"))
        A = self.p.gauge(_need(task, "gauge"), E.chart)
        rep = courant.change_conn_check(E, A, self.degree(task))
        return _status(rep), rep, dict(rep.data)

    def task_vdiff(self, task):
        C, rep = vertex.vdiff_check(self.p.vertex(_need(task, "left")),
                                    self.p.vertex(_need(task, "right")), self.degree(task))
        self._expect(rep, task, C.H, C.chart, 3)
        return _status(rep), rep, {"twist": str(C.H), "gauge": str(C.gauge)}

    def task_canonical_pairing(self, task):
        rep = vertex.canonical_pairing_check(_need(task, "n"))
        return _status(rep), rep, {}

    def _cocycle_result(self, task, t):
        self.cocycles[task["id"]] = t
        rep = cech.total_cocycle_check(t)
        return _status(rep), rep, {"cocycle": t.to_dict()}

    def task_pontryagin(self, task):
        nerve = self.p.nerve(_need(task, "nerve"))
        gauges = {}
        for key, name in _need(task, "gauges").items():
            (v,) = _simplex(key)
            gauges[v] = self.p.gauge(name)
        return self._cocycle_result(task, cech.pontryagin_cocycle(nerve, gauges))

    def task_pontryagin_transitions(self, task):
        nerve, g = self.p.transitions(_need(task, "transitions"))
        if "nerve" in task and self.p.nerve(task["nerve"]) is not nerve:
            raise ProblemError("transitions belong to a different nerve", f"tasks/{task['id']}")
        n = len(next(iter(g.values())))
        lie = self.p.lie(task["lie"]) if "lie" in task else liestruct.gl(n)
        return self._cocycle_result(task, cech.pontryagin_from_transitions(nerve, g, lie))

    def task_cocycle_check(self, task):
        rep = cech.total_cocycle_check(self.cocycle(task))
        return _status(rep), rep, {}

    def _bounded(self, task, found, rep):
        if "expect_found" in task:
            rep.add("expected-outcome", found == task["expect_found"])
            if found != task["expect_found"]:
                return "fail"
            return "pass" if found else "none-within-bound"
        if found:
            return "pass"
        return "fail" if self.require_coboundary else "none-within-bound"

    def task_coboundary(self, task):
        t = self.cocycle(task)
        if "relative_to" in task:
            t = cech.cocycle_difference(t, self.cocycle({"id": task["id"], "cocycle": task["relative_to"]}))
        res = cech.coboundary_solve(t, self.degree(task))
        rep = Report(f"coboundary (D={res.degree})")
        if res.found:
            for c in res.verification.checks:
                rep.checks.append(c)
        status = self._bounded(task, res.found, rep)
        return status, rep, res.to_dict()

    def task_cup_compare(self, task):
        t = self.cocycle(task)
        scale = _frac(task.get("gram_scale", 1), f"tasks/{task['id']}/gram_scale")
        rep, gamma, cert = cech.cup_compare(t, self.degree(task), scale)
        found = gamma is not None
        out = Report(rep.title)
        status = self._bounded(task, found, out)
        return status, out, {"cohomologous": found, "certificate": cert.to_dict()}


def _order(tasks):
    """Tasks sorted so that every producer runs before its consumers (stable otherwise)."""
    ids = [t["id"] for t in tasks]
    if len(set(ids)) != len(ids):
        raise ProblemError("task ids must be unique", "tasks")
    by_id = {t["id"]: t for t in tasks}
    done, out, visiting = set(), [], set()

    def visit(t):
        if t["id"] in done:
            return
        if t["id"] in visiting:
            raise ProblemError(f"dependency cycle through {t['id']!r}", "tasks")
        visiting.add(t["id"])
        for dep in (t.get("cocycle"), t.get("relative_to")):
            if dep is None:
                continue
            if dep not in by_id:
                raise ProblemError(f"task {t['id']!r} depends on unknown task {dep!r}", "tasks")
            visit(by_id[dep])
        visiting.discard(t["id"])
        done.add(t["id"])
        out.append(t)
    for t in tasks:
        visit(t)
    return out


@dataclass
class RunOutcome:
    exit_code: int
    results: list
    error: dict | None = None
    cocycles: dict = field(default_factory=dict)

    def to_dict(self):
        out = {"passed": self.exit_code == EXIT_OK, "exit_code": self.exit_code,
               "tasks": [r.to_dict() for r in self.results]}
        if self.error:
            out["error"] = self.error
        return out


def run_problem(doc, degree_bound=2, require_coboundary=False):
    """Validate and execute a problem document; never raises for input or math errors."""
    results = []
    runner = None
    current = None
    try:
        validate_problem(doc)
        runner = Runner(Problem(doc), degree_bound, require_coboundary)
        for task in _order(doc["tasks"]):
            current = task["id"]
            t0 = time.perf_counter()
            status, rep, result = runner.run(task)
            results.append(TaskResult(task["id"], task["kind"], status, rep, result,
                                      time.perf_counter() - t0))
        code = EXIT_OK if all(r.status != "fail" for r in results) else EXIT_FAIL
        return RunOutcome(code, results, cocycles=runner.cocycles)
    except ProblemError as exc:
        err = {"kind": "schema", "message": str(exc)}
        if exc.where:
            err["where"] = exc.where
        if exc.position is not None:
            err["position"] = exc.position
        code = EXIT_SCHEMA
    except PRECONDITION_ERRORS as exc:
        err = {"kind": "precondition", "message": f"{type(exc).__name__}: {exc}"}
        code = EXIT_PRECONDITION
    except Exception as exc:  # noqa: BLE001 - reported as an internal breach
        err = {"kind": "internal", "message": f"{type(exc).__name__}: {exc}"}
        code = EXIT_INTERNAL
    if current is not None:
        err["task"] = current
    return RunOutcome(code, results, err, runner.cocycles if runner else {})


# -- output ----------------------------------------------------------------------------------

def format_human(outcome):
    lines = []
    for r in outcome.results:
        lines.append(f"[{r.status.upper()}] {r.id} ({r.kind})  {r.seconds:.2f}s")
        for c in r.report.checks:
            mark = "ok  " if c.passed else "FAIL"
            line = f"    [{mark}] {c.name}"
            if not c.passed:
                line += f"  residual={c.residual}"
                if c.witness:
                    line += f"  at {c.witness}"
            lines.append(line)
        for key, value in r.result.items():
            if key in ("cocycle", "beta", "h"):
                continue
            lines.append(f"    {key}: {json.dumps(value, sort_keys=True) if isinstance(value, dict) else value}")
    if outcome.error:
        e = outcome.error
        where = f" at {e['where']}" if "where" in e else ""
        pos = f", position {e['position']}" if "position" in e else ""
        task = f" (task {e['task']})" if "task" in e else ""
        lines.append(f"error [{e['kind']}]{task}{where}{pos}: {e['message']}")
    verdict = "PASS" if outcome.exit_code == EXIT_OK else "FAIL"
    lines.append(f"{verdict} (exit {outcome.exit_code})")
    return "\n".join(lines)


def format_json(outcome):
    doc = outcome.to_dict()
    validate_report(doc)
    return json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False)


def build_parser():
    parser = argparse.ArgumentParser(prog="algebroids", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="execute the tasks of a problem file")
    run.add_argument("file", help="problem file (JSON)")
    run.add_argument("--degree-bound", type=int, default=2, metavar="N",
                     help="default polynomial degree bound for generic elements and solvers")
    run.add_argument("--require-coboundary", action="store_true",
                     help="treat 'none within bound' answers as failures")
    run.add_argument("--emit-cocycle", metavar="PATH", help="write produced cocycles as JSON")
    run.add_argument("--format", choices=("human", "json"), default="human")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        with open(args.file, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        print(f"error: cannot read {args.file}: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except json.JSONDecodeError as exc:
        outcome = RunOutcome(EXIT_SCHEMA, [], {"kind": "schema", "message": f"invalid JSON: {exc.msg}",
                                               "position": exc.pos})
    else:
        outcome = run_problem(doc, args.degree_bound, args.require_coboundary)
    if args.emit_cocycle:
        payload = {k: t.to_dict() for k, t in sorted(outcome.cocycles.items())}
        with open(args.emit_cocycle, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
    print(format_json(outcome) if args.format == "json" else format_human(outcome))
    return outcome.exit_code


if __name__ == "__main__":
    sys.exit(main())
