"""Command-line front end: ``k3dyn verify | spectrum | orbit | canheight | seed``.

Exit codes: 0 success, 1 failed certificate or unsupported spectrum,
2 bad arguments or input, 3 point not on the surface or degenerate fiber.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from . import dynsys
from .dynsys import (
    PolarizedSystem,
    arithmetic_degree_zero,
    dirichlet_verdict,
    effectivity_verdict,
    hyperbolic_certificate,
    kodaira_verdict,
    positivity_verdict,
    pullback_intersection_sequence,
    self_intersection_verdict,
    spectrum,
)
from .errors import (
    DegenerateFiber,
    FieldMismatch,
    IrreducibleCubic,
    K3DynError,
    NoExpandingEigenvalue,
    PointNotOnSurface,
    RepeatedEigenvalueDefect,
)
from .exactnum import QuadExt, qe_sign, qe_significant
from .piclattice import (
    DivisorClass,
    PicLattice,
    PullbackMap,
    intersect,
    load_lattice,
    validate_scaled_isometry,
)
from .pointdyn import (
    DEFAULT_BIT_BUDGET,
    apply_word,
    canonical_height,
    orbit,
    parse_point,
    word_polarization,
)
from .surfaces import (
    BETA_AB,
    BETA_C,
    SC_TABLE,
    LatticeModel,
    check_model,
    lattice_model,
    load_surface,
    model_for,
    normalize_word,
    save_surface,
)

FAMILIES = ("s_ab", "s_c")
ELIDE_AT = 80
MIN_BIT_BUDGET = 2**10


@dataclass
class RunConfig:
    command: str
    paths: list = field(default_factory=list)
    family: str = "all"
    word: list = field(default_factory=list)
    steps: int = 0
    bit_budget: int = DEFAULT_BIT_BUDGET
    output: str = "text"
    precision: int = 6

    def __post_init__(self):
        if self.steps < 0:
            raise ValueError("steps must be non-negative")
        if self.bit_budget < MIN_BIT_BUDGET:
            raise ValueError(f"bit budget must be at least {MIN_BIT_BUDGET}")
        if self.precision < 1:
            raise ValueError("precision must be positive")


def precision_from_env(default: int = 6) -> int:
    raw = os.environ.get("K3DYN_PRECISION")
    if raw is None:
        return default
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"K3DYN_PRECISION must be an integer, got {raw!r}") from None
    if value < 1:
        raise ValueError("K3DYN_PRECISION must be positive")
    return value


def show(x, prec: int) -> str:
    """Exact form with a decimal approximation: ``7+4√3 ≈ 13.9282``."""
    x = QuadExt.coerce(x)
    if x.is_rational and x.rat.denominator == 1:
        return str(x)
    return f"{x} ≈ {qe_significant(x, prec)}"


def show_float(v: float, prec: int) -> str:
    return f"{v:.{prec}g}"


def show_class(d: DivisorClass, prec: int) -> str:
    exact = "[" + ", ".join(str(c) for c in d.coords) + "]"
    if all(c.is_rational for c in d.coords):
        return exact
    return exact + " ≈ [" + ", ".join(qe_significant(c, prec) for c in d.coords) + "]"


def dump_json(obj) -> str:
    """Canonical JSON: sorted keys, two-space indent, UTF-8 text."""
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False)


def parse_word(text: str) -> list[str]:
    parts = [p.strip() for p in text.split(",")]
    if not text.strip() or any(not p for p in parts):
        raise ValueError(f"cannot parse word {text!r}")
    return parts


# -- verify ------------------------------------------------------------------


@dataclass
class Check:
    ok: bool
    text: str


def _guard(checks: list[Check], label: str, fn):
    try:
        fn()
    except K3DynError as exc:
        checks.append(Check(False, f"{label}: {type(exc).__name__}: {exc}"))


def _structural_checks(model: LatticeModel) -> list[Check]:
    out = []
    problems = check_model(model)
    labels = ", ".join(m.label for m in model.involutions.values())
    out.append(Check(not problems, f"involutions {labels}: M² = I and isometry" + (f" ({'; '.join(problems)})" if problems else "")))
    for word, m in model.composites.items():
        out.append(Check(validate_scaled_isometry(m, model.lattice), f"{m.label}: isometry of the lattice"))
    return out


def _table_checks_sc(model: LatticeModel) -> list[Check]:
    out = []
    beta3 = BETA_C**3
    for word, (big, small, minus) in SC_TABLE.items():
        m = model.composites[word]
        spec = spectrum(m, model.lattice)
        values = [v for v, _ in spec]
        ok = values == [beta3, beta3.inverse(), QuadExt(-1)]
        vecs = {v: d for v, d in spec}
        ok = ok and model.classes[big].is_proportional(vecs.get(beta3, model.lattice.zero()), positive=True)
        ok = ok and model.classes[small].is_proportional(vecs.get(beta3.inverse(), model.lattice.zero()), positive=True)
        ok = ok and model.minus_one_vectors[word].is_proportional(vecs.get(QuadExt(-1), model.lattice.zero()))
        minus_txt = "[" + ",".join(str(v) for v in minus) + "]"
        out.append(Check(ok, f"{m.label}: β³ ∝ {big}, β⁻³ ∝ {small}, −1 ∝ {minus_txt}"))
    return out


def _table_checks_ab(model: LatticeModel) -> list[Check]:
    out = []
    alpha = BETA_AB**2
    for word, name in ((("y", "x"), "E⁺"), (("x", "y"), "E⁻")):
        m = model.composites[word]
        spec = dict(spectrum(m, model.lattice))
        ok = alpha in spec and model.classes[name].is_proportional(spec[alpha], positive=True)
        out.append(Check(ok, f"{m.label}: eigenpair ({alpha}, ∝ {name})"))
    return out


SPOT_VALUES = {
    "s_ab": [("E⁺", 0, QuadExt(0, 2, 3))],
    "s_c": [("E₁", 0, QuadExt(-4, 2, 5))],
}
AMPLE_WITNESS = {"s_ab": (QuadExt(1, 1, 3), QuadExt(1, 1, 3))}


def _pair_checks(model: LatticeModel, pair, prec: int) -> tuple[list[Check], list[dynsys.Verdict]]:
    out: list[Check] = []
    verdicts: list[dynsys.Verdict] = []
    lat = model.lattice
    fwd = model.pullback_of_word(pair.forward_word)
    e = model.named_class(pair.forward_class)
    e_back = model.named_class(pair.backward_class)
    state = {}

    def polarize():
        state["sys"] = PolarizedSystem(lat, fwd, pair.alpha, e, pair.forward_class)
        state["cert"] = hyperbolic_certificate(state["sys"], pair.backward_class)
        state["back"] = PolarizedSystem(
            lat, model.pullback_of_word(pair.backward_word), pair.alpha, e_back, pair.backward_class
        )

    _guard(out, f"{pair.name}: polarization", polarize)
    if "cert" not in state:
        return out, verdicts
    sys_, cert, back = state["sys"], state["cert"], state["back"]
    out.append(Check(True, f"{pair.name}: {fwd.label} {pair.forward_class} = {show(pair.alpha, prec)} {pair.forward_class}"))
    out.append(Check(
        e_back.is_proportional(cert.dual_class, positive=True),
        f"{pair.name}: dual class ∝ {pair.backward_class} (1/α eigenclass of {fwd.label})",
    ))
    witness = ", ".join(show(c, prec) for c in cert.ample_witness)
    expected = AMPLE_WITNESS.get(model.name)
    ok = expected is None or cert.ample_witness == expected
    out.append(Check(ok, f"{pair.name}: {pair.forward_class} + {pair.backward_class} ample, witness ({witness})"))

    for s in (sys_, back):
        def selfint(s=s):
            v = self_intersection_verdict(s)
            verdicts.append(v)
            out.append(Check(v.holds, f"({s.name})² = 0"))
        _guard(out, f"({s.name})²", selfint)

    basis = [lat.basis_class(i) for i in range(lat.rank)]

    def positivity():
        v = positivity_verdict(cert, basis)
        verdicts.append(v)
        vals = ", ".join(f"({sys_.name},{lab})={show(intersect(sys_.polarizing_class, b), prec)}"
                         for lab, b in zip(lat.basis_labels, basis))
        out.append(Check(v.holds, f"positivity: {vals}"))
        for name, idx, want in SPOT_VALUES.get(model.name, []):
            cls = model.named_class(name)
            if name in (pair.forward_class, pair.backward_class):
                got = intersect(cls, basis[idx])
                out.append(Check(got == want, f"({name},{lat.basis_labels[idx]}) = {show(got, prec)}"))

    _guard(out, f"{pair.name}: positivity", positivity)

    def sequence():
        for lab, b in zip(lat.basis_labels, basis):
            seq = pullback_intersection_sequence(cert, b, 6)
            out.append(Check(
                all(qe_sign(t) > 0 for t in seq),
                f"{pair.name}: ((φⁿ)*({pair.forward_class}+{pair.backward_class}),{lab}) n=0..6 matches matrix powers, all > 0",
            ))

    _guard(out, f"{pair.name}: pullback sequence", sequence)

    def rest():
        eff = effectivity_verdict(cert)
        verdicts.append(eff)
        out.append(Check(eff.holds, f"not effective: {', '.join(eff.subjects)}"))
        kod = kodaira_verdict(cert, etale=True)
        verdicts.append(kod)
        out.append(Check(kod.holds, "canonical class obstruction: K_X = 0 consistent"))
        dv = dirichlet_verdict(cert)
        verdicts.append(dv)
        out.append(Check(dv.holds, f"Dirichlet: FAILS for {', '.join(dv.subjects)}"))
        ad = arithmetic_degree_zero(sys_, dynsys.SURFACE_DIM)
        verdicts.append(ad)
        factor = next(ev.value for ev in ad.evidence if ev.step.startswith("1 - alpha"))
        out.append(Check(ad.holds and bool(factor), f"arithmetic degree of {dynsys.bar(sys_.name)} = 0 (factor 1−α³ = {show(factor, prec)})"))

    _guard(out, f"{pair.name}: verdicts", rest)
    return out, verdicts


def verify_family(name: str, prec: int = 6) -> tuple[list[Check], list[dynsys.Verdict]]:
    model = lattice_model(name)
    checks = _structural_checks(model)
    verdicts: list[dynsys.Verdict] = []
    table = _table_checks_sc if name == "s_c" else _table_checks_ab
    _guard(checks, "spectrum table", lambda: checks.extend(table(model)))
    for pair in model.pairs:
        c, v = _pair_checks(model, pair, prec)
        checks.extend(c)
        verdicts.extend(v)
    return checks, verdicts


def cmd_verify(args, cfg: RunConfig) -> int:
    families = FAMILIES if cfg.family == "all" else (cfg.family,)
    with ThreadPoolExecutor(max_workers=len(families)) as pool:
        results = dict(zip(families, pool.map(lambda f: verify_family(f, cfg.precision), families)))
    all_ok = True
    report = {}
    for fam in sorted(results):
        checks, verdicts = results[fam]
        all_ok &= all(c.ok for c in checks)
        if cfg.output == "json":
            report[fam] = {
                "checks": [{"ok": c.ok, "text": c.text} for c in checks],
                "verdicts": [v.to_json() for v in verdicts],
            }
            continue
        print(f"== {fam} ==")
        for c in checks:
            print(f"{'PASS' if c.ok else 'FAIL'}  {c.text}")
    if cfg.output == "json":
        report["ok"] = all_ok
        print(dump_json(report))
    else:
        print("all certificates PASS" if all_ok else "some certificates FAILED")
    return 0 if all_ok else 1


# -- spectrum ----------------------------------------------------------------


def _load_matrix(path: str) -> PullbackMap:
    with open(path, encoding="utf-8") as fh:
        return PullbackMap.from_json(json.load(fh))


def _paper_names(model: LatticeModel | None, d: DivisorClass) -> list[str]:
    if model is None or d.lattice != model.lattice:
        return []
    names = [n for n, c in model.classes.items() if c.is_proportional(d)]
    for v in {tuple(v.coords) for v in model.minus_one_vectors.values()}:
        if model.lattice.divisor(v).is_proportional(d):
            names.append("[" + ",".join(str(c) for c in v) + "]")
    return names


def cmd_spectrum(args, cfg: RunConfig) -> int:
    model = None
    if args.lattice.startswith("builtin:"):
        model = lattice_model(args.lattice)
        lattice: PicLattice = model.lattice
    else:
        lattice = load_lattice(args.lattice)
    if args.word is not None:
        if model is None:
            raise ValueError("--word needs a built-in lattice")
        m = model.pullback_of_word(parse_word(args.word))
    else:
        m = _load_matrix(args.matrix)
    try:
        pairs = spectrum(m, lattice)
    except (IrreducibleCubic, RepeatedEigenvalueDefect, FieldMismatch) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    rows = []
    for value, vec in pairs:
        rows.append({
            "eigenvalue": value.to_json(),
            "eigenvalue_text": str(value),
            "decimal": qe_significant(value, cfg.precision),
            "eigenvector": [c.to_json() for c in vec.coords],
            "eigenvector_text": [str(c) for c in vec.coords],
            "proportional_to": _paper_names(model, vec),
        })
    if cfg.output == "json":
        print(dump_json({"map": m.label or "matrix", "matrix": [list(r) for r in m.matrix], "spectrum": rows}))
        return 0
    print(f"map {m.label or args.matrix}: {[list(r) for r in m.matrix]}")
    for (value, vec), row in zip(pairs, rows):
        note = f"  ∝ {', '.join(row['proportional_to'])}" if row["proportional_to"] else ""
        print(f"λ = {show(value, cfg.precision)}    v = {show_class(vec, cfg.precision)}{note}")
    return 0


# -- orbit / canheight ----------------------------------------------------------


def _elide(text: str, limit: int = ELIDE_AT) -> str:
    """Keep both ends of an over-long string, at most ``limit`` characters."""
    if len(text) <= limit:
        return text
    keep = (limit - 3) // 2
    return f"{text[:keep]}...{text[-keep:]}"


def _load_surface_point(args):
    surface = load_surface(args.surface)
    point = parse_point(surface, args.point)
    word = normalize_word(model_for(surface), parse_word(args.word))
    return surface, point, word


def cmd_orbit(args, cfg: RunConfig) -> int:
    surface, point, word = _load_surface_point(args)
    rec = orbit(surface, word, point, cfg.steps, cfg.bit_budget)
    if cfg.output == "json":
        obj = rec.to_json()
        if args.elide:
            for step in obj["steps"]:
                step["point"] = _elide(step["point"])
        print(dump_json(obj))
    else:
        totals = rec.total_heights()
        print(f"word {','.join(map(str, word))}, {len(rec.points) - 1} step(s)")
        print(f"{'n':>3}  {'bits':>8}  {'h total':>12}  {'ratio':>9}  point")
        for k, (p, h, b) in enumerate(zip(rec.points, totals, rec.bit_sizes)):
            ratio = show_float(h / totals[k - 1], cfg.precision) if k and totals[k - 1] > 0 else "-"
            print(f"{k:>3}  {b:>8}  {show_float(h, cfg.precision):>12}  {ratio:>9}  {_elide(str(p))}")
        if rec.truncated:
            print(f"truncated: {rec.error}")
    if rec.error and rec.error.startswith("DegenerateFiber"):
        return 3
    return 0


def _class_name(surface, d: DivisorClass, fallback: str) -> str:
    names = [n for n, c in model_for(surface).classes.items() if c.is_proportional(d, positive=True)]
    return names[0] if names else fallback


def cmd_canheight(args, cfg: RunConfig) -> int:
    surface, point, word = _load_surface_point(args)
    if cfg.steps < 1:
        raise ValueError("canheight needs --steps >= 1")
    rev = list(reversed(word))
    fwd_sys = word_polarization(surface, word)
    bwd_sys = word_polarization(surface, rev)
    e_name = _class_name(surface, fwd_sys.polarizing_class, "E")
    f_name = _class_name(surface, bwd_sys.polarizing_class, "E′")
    q = apply_word(surface, word, point)
    est = {
        "forward": canonical_height(surface, fwd_sys, word, point, cfg.steps, cfg.bit_budget),
        "backward": canonical_height(surface, bwd_sys, rev, point, cfg.steps, cfg.bit_budget),
        "forward_next": canonical_height(surface, fwd_sys, word, q, cfg.steps, cfg.bit_budget),
        "backward_next": canonical_height(surface, bwd_sys, rev, q, cfg.steps, cfg.bit_budget),
    }
    alpha = float(fwd_sys.alpha)

    def ratio(a, b):
        return b.value / a.value if a.value else None

    r_plus = ratio(est["forward"], est["forward_next"])
    r_minus = ratio(est["backward"], est["backward_next"])
    checks = {
        "plus": None if r_plus is None else abs(r_plus / alpha - 1),
        "minus": None if r_minus is None else abs(r_minus * alpha - 1),
    }
    if cfg.output == "json":
        print(dump_json({
            "word": [str(w) for w in word],
            "alpha": fwd_sys.alpha.to_json(),
            "classes": {"forward": e_name, "backward": f_name},
            "estimates": {k: v.per_step_estimates for k, v in est.items()},
            "scaling": {"plus": r_plus, "minus": r_minus},
            "relative_error": checks,
        }))
        return 0
    p = cfg.precision
    print(f"word {','.join(map(str, word))}: α = {show(fwd_sys.alpha, p)}")
    print(f"{'k':>3}  {'α⁻ᵏ h_' + e_name + '(φᵏP)':>20}  {'α⁻ᵏ h_' + f_name + '(φ⁻ᵏP)':>20}")
    for k, (a, b) in enumerate(zip(est["forward"].per_step_estimates, est["backward"].per_step_estimates)):
        print(f"{k:>3}  {show_float(a, p):>20}  {show_float(b, p):>20}")
    for label, r, err, target in (
        (f"ĥ_{e_name}(φP)/ĥ_{e_name}(P)", r_plus, checks["plus"], "α"),
        (f"ĥ_{f_name}(φP)/ĥ_{f_name}(P)", r_minus, checks["minus"], "1/α"),
    ):
        if r is None:
            print(f"{label}: undefined (zero estimate at P)")
        else:
            verdict = "within 10%" if err <= 0.1 else "outside 10%"
            print(f"{label} = {show_float(r, p)}  vs {target}: relative error {show_float(err, 3)} ({verdict})")
    return 0


# -- seed ----------------------------------------------------------------------


def cmd_seed(args, cfg: RunConfig) -> int:
    from .fixtures import periodic_fixture_222, seed_wehler22, seed_wehler222

    if args.periodic:
        surface, point, _ = periodic_fixture_222(args.seed)
    elif args.family_name == "s_c":
        surface, point = seed_wehler222(random.Random(args.seed))
    else:
        surface, point = seed_wehler22(random.Random(args.seed))
    save_surface(surface, args.out)
    print(point)
    return 0


# -- entry point ---------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="k3dyn", description="Exact dynamics on Wehler K3 surfaces.")
    sub = ap.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run the built-in certificate suite")
    v.add_argument("--family", choices=("s_ab", "s_c", "all"), default="all")
    v.add_argument("--json", action="store_true")

    s = sub.add_parser("spectrum", help="exact eigenpairs of a pullback map")
    s.add_argument("--lattice", required=True, help="lattice JSON path or builtin:s_ab / builtin:s_c")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--word", help="comma-separated involution word, e.g. 1,3,2 or y,x")
    g.add_argument("--matrix", help="JSON file with an integer matrix")
    s.add_argument("--json", action="store_true")

    for name, helptext in (("orbit", "iterate an involution word"), ("canheight", "canonical height estimates")):
        o = sub.add_parser(name, help=helptext)
        o.add_argument("--surface", required=True)
        o.add_argument("--point", required=True)
        o.add_argument("--word", required=True)
        o.add_argument("--steps", type=int, required=True)
        o.add_argument("--bit-budget", type=int, default=DEFAULT_BIT_BUDGET)
        o.add_argument("--json", action="store_true")
        o.add_argument("--elide", action="store_true", help="shorten long coordinates in JSON output")

    sd = sub.add_parser("seed", help="write a random surface through a rational point")
    sd.add_argument("--family", dest="family_name", choices=FAMILIES, default="s_c")
    sd.add_argument("--seed", type=int, default=0)
    sd.add_argument("--periodic", action="store_true", help="(2,2,2) surface with a period-2 point for 1,3,2")
    sd.add_argument("--out", required=True)
    return ap


COMMANDS = {
    "verify": cmd_verify,
    "spectrum": cmd_spectrum,
    "orbit": cmd_orbit,
    "canheight": cmd_canheight,
    "seed": cmd_seed,
}


def main(argv=None) -> int:
    # orbit coordinates routinely exceed the default 4300-digit str() limit
    if hasattr(sys, "set_int_max_str_digits"):
        sys.set_int_max_str_digits(0)
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        cfg = RunConfig(
            command=args.command,
            family=getattr(args, "family", "all"),
            steps=getattr(args, "steps", 0),
            bit_budget=getattr(args, "bit_budget", DEFAULT_BIT_BUDGET),
            output="json" if getattr(args, "json", False) else "text",
            precision=precision_from_env(),
        )
        return COMMANDS[args.command](args, cfg)
    except (PointNotOnSurface, DegenerateFiber) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    except NoExpandingEigenvalue as exc:
        print(f"NoExpandingEigenvalue: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except K3DynError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
