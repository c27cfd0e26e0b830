"""Batch command-line surface: witness searches, identity checks, zero-cache
maintenance, and CSV/JSON report emission.

Exit status: 0 on success, 2 on usage errors (bad flags, bad config, bad
math domain), 3 when a certified computation fails its own check (identity
violation, certification mismatch, exhausted search cap, accuracy loss).
"""

import argparse
import csv
import io
import json
import sys

import numpy as np

from .characters import (
    DirichletCharacter,
    ExclusionSet,
    characters_mod,
    make_character,
    make_extension,
    principal_character,
)
from .config import (
    DEFAULT_CONFIG,
    Config,
    effective_cache_path,
    load_config,
    merge_config,
    parse_overrides,
    report_envelope,
)
from .core import (
    AccuracyError,
    CapExhaustedError,
    CertificationError,
    ConstructionError,
    CoverageError,
    DomainError,
    IdentityViolationError,
    ToolkitError,
    UsageError,
)
from .explicit_formula import (
    CONSTANT_NAMES,
    EstimationInput,
    KernelParams,
    contour_J,
    estimation_report,
    implied_constant_fit,
    prime_side_J,
    recommended_cutoff,
)
from .landau_method import (
    admissible_window,
    smoothed_sum_direct,
    smoothed_sum_shifted,
    theorem_bound,
    witness_search_char,
    witness_search_chebotarev,
    witness_search_pair,
)
from .lfunctions import (
    certify_zero_count,
    zero_cache_append,
    zero_cache_load,
    zero_scan,
)
from .rankin_satake import sample_classes, schur_positivity_check

__all__ = ["main"]


# ---------------------------------------------------------------------------
# argument helpers

def _select_character(q: int, selector: str) -> DirichletCharacter:
    """Resolve a character selector: 'principal', 'odd', 'even', or a
    comma-separated exponent list on the canonical unit-group generators."""
    sel = selector.strip().lower()
    if sel == "principal":
        return principal_character(q)
    if sel in ("odd", "even"):
        want = 1 if sel == "odd" else 0
        found = [chi for chi in characters_mod(q)
                 if chi.parity_b == want and not chi.is_principal]
        if len(found) != 1:
            raise UsageError(
                f"modulus {q} has {len(found)} non-principal {sel} "
                f"characters; pick one by exponent list")
        return found[0]
    try:
        exps = [int(tok) for tok in sel.split(",")]
    except ValueError:
        raise UsageError(f"bad character selector {selector!r}") from None
    return make_character(q, exps)


def _parse_exclude(text: str | None) -> ExclusionSet:
    if not text:
        return ExclusionSet.of()
    try:
        return ExclusionSet.of(*(int(tok) for tok in text.split(",")))
    except ValueError:
        raise UsageError(f"bad exclusion list {text!r}") from None


def _parse_floats(text: str, flag: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",")]
    except ValueError:
        raise UsageError(f"bad numeric list for {flag}: {text!r}") from None


def _load_cfg(args) -> Config:
    cfg = load_config(args.config) if args.config else DEFAULT_CONFIG
    if args.set:
        cfg = merge_config(cfg, parse_overrides(args.set))
    if getattr(args, "seed", None) is not None:
        cfg = merge_config(cfg, [("seed", str(args.seed))])
    return cfg


# ---------------------------------------------------------------------------
# emission

def _write(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="ascii") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_json(cfg: Config, command: str, body: dict, out: str | None) -> None:
    report = dict(report_envelope(cfg, command))
    report["config"] = {k: v for k, v in sorted(cfg.echo().items())}
    report.update(body)
    _write(json.dumps(report, sort_keys=True, indent=2) + "\n", out)


def _emit_csv(cfg: Config, command: str, header: list[str], rows,
              out: str | None) -> None:
    buf = io.StringIO()
    for key, value in sorted(report_envelope(cfg, command).items()):
        buf.write(f"# {key}={value}\n")
    for key, value in sorted(cfg.echo().items()):
        buf.write(f"# config.{key}={value}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    _write(buf.getvalue(), out)


# ---------------------------------------------------------------------------
# subcommands

def _cmd_witness_char(args, cfg: Config) -> int:
    chi = _select_character(args.modulus, args.char)
    rep = witness_search_char(chi, _parse_exclude(args.exclude),
                              cap=args.cap or cfg.witness_cap,
                              c_constant=cfg.constant("C_B"))
    _emit_json(cfg, "witness-char", rep.as_dict(), args.out)
    return 0


def _cmd_witness_pair(args, cfg: Config) -> int:
    chi = _select_character(args.modulus, args.char)
    chi2 = _select_character(args.modulus2, args.char2)
    rep = witness_search_pair(chi, chi2, _parse_exclude(args.exclude),
                              cap=args.cap or cfg.witness_cap,
                              c_constant=cfg.constant("C_C"),
                              epsilon=cfg.epsilon)
    _emit_json(cfg, "witness-pair", rep.as_dict(), args.out)
    return 0


def _cmd_witness_chebotarev(args, cfg: Config) -> int:
    try:
        subgroup = [int(tok) for tok in args.subgroup.split(",")]
    except ValueError:
        raise UsageError(f"bad subgroup list {args.subgroup!r}") from None
    ext = make_extension(args.conductor, subgroup)
    rep = witness_search_chebotarev(ext, args.target_class,
                                    _parse_exclude(args.exclude),
                                    cap=args.cap or cfg.witness_cap,
                                    c_constant=cfg.constant("C_A"))
    _emit_json(cfg, "witness-chebotarev", rep.as_dict(), args.out)
    return 0


def _cmd_explicit_formula(args, cfg: Config) -> int:
    chi = _select_character(args.modulus, args.char)
    params = KernelParams(kind=args.kernel, x=args.x, y=args.y)
    cutoff = args.cutoff or recommended_cutoff(params)
    prec = cfg.precision()
    prime = complex(prime_side_J(chi, params, cutoff, prec))
    contour = complex(contour_J(chi, params, prec))
    diff = abs(prime - contour)
    _emit_json(cfg, "explicit-formula", {
        "kernel": args.kernel, "x": args.x, "y": args.y, "cutoff": cutoff,
        "character": chi.key(),
        "prime_side_re": prime.real, "prime_side_im": prime.imag,
        "contour_re": contour.real, "contour_im": contour.imag,
        "abs_diff": diff, "tolerance": args.tol,
        "identity_ok": diff <= args.tol,
    }, args.out)
    if diff > args.tol:
        print(f"error: prime side and contour differ by {diff:.3e} "
              f"(tolerance {args.tol:.3e})", file=sys.stderr)
        return 3
    return 0


def _cmd_zero_scan(args, cfg: Config) -> int:
    chi = _select_character(args.modulus, args.char)
    path = args.cache or effective_cache_path(cfg)
    height = args.height or cfg.zero_height
    prec = cfg.precision()
    cached, cert_height = zero_cache_load(path, chi)
    if cert_height >= height:
        zeros = [z for z in cached if z.gamma <= height]
        rescanned = False
        added = 0
    else:
        zeros = zero_scan(chi, height, prec)
        fresh = [z for z in zeros if z.gamma > cert_height]
        added = zero_cache_append(path, chi, fresh, height)
        rescanned = True
    certify_zero_count(chi, zeros, height, prec)
    _emit_json(cfg, "zero-scan", {
        "character": chi.key(),
        "height": height,
        "zero_count": len(zeros),
        "lowest_gamma": min((z.gamma for z in zeros), default=None),
        "highest_gamma": max((z.gamma for z in zeros), default=None),
        "cache_path": path,
        "rescanned": rescanned,
        "added": added,
    }, args.out)
    return 0


def _cmd_landau_check(args, cfg: Config) -> int:
    chi = _select_character(args.modulus, args.char)
    chi2 = _select_character(args.modulus2, args.char2)
    S = _parse_exclude(args.exclude)
    window = admissible_window((0.0, 1.0), H=args.H or cfg.H,
                               delta=args.delta or cfg.delta)
    direct = complex(smoothed_sum_direct(chi, chi2, S, args.x))
    shifted = complex(smoothed_sum_shifted(chi, chi2, S, args.x, window,
                                           prec=cfg.precision()))
    diff = abs(direct - shifted)
    _emit_json(cfg, "landau-check", {
        "character": chi.key(), "character2": chi2.key(),
        "excluded_S": sorted(S.primes), "x": args.x,
        "window_H": window.H, "window_delta": window.delta,
        "direct_re": direct.real, "direct_im": direct.imag,
        "shifted_re": shifted.real, "shifted_im": shifted.imag,
        "abs_diff": diff, "tolerance": args.tol,
        "identity_ok": diff <= args.tol,
    }, args.out)
    if diff > args.tol:
        print(f"error: direct and shifted sums differ by {diff:.3e} "
              f"(tolerance {args.tol:.3e})", file=sys.stderr)
        return 3
    return 0


def _cmd_schur_check(args, cfg: Config) -> int:
    rng = np.random.default_rng(cfg.seed)
    classes = sample_classes(rng, args.samples, args.d,
                             max_shift=args.max_shift)
    rows = []
    failures = 0
    for i, sigma in enumerate(classes):
        res = schur_positivity_check(sigma)
        failures += 0 if res.passed else 1
        rows.append([i, args.d, sigma.residue_q,
                     repr(float(sigma.rb)), repr(float(res.a_qd)),
                     int(res.passed)])
    _emit_csv(cfg, "schur-check",
              ["index", "d", "residue_q", "rb", "a_qd", "passed"],
              rows, args.out)
    if failures:
        print(f"error: {failures} of {args.samples} positivity checks failed",
              file=sys.stderr)
        return 3
    return 0


def _cmd_bound_table(args, cfg: Config) -> int:
    ns_list = _parse_floats(args.ns_list, "--ns-list")
    header = ["theorem", "d_L", "n_L", "conductor", "d_K", "Q", "d", "H", "R",
              "N_S", "epsilon", "bound"]
    rows = []
    if args.theorem == "A":
        if not args.dl_list:
            raise UsageError("theorem A needs --dl-list")
        for d_L in _parse_floats(args.dl_list, "--dl-list"):
            for ns in ns_list:
                bound = theorem_bound("A", d_L=d_L, N_S=ns, n_L=args.nl,
                                      c_constant=cfg.constant("C_A"))
                rows.append(["A", d_L, args.nl, "", "", "", "", "", "",
                             ns, "", repr(bound)])
    elif args.theorem == "B":
        if not args.conductor_list:
            raise UsageError("theorem B needs --conductor-list")
        for f in _parse_floats(args.conductor_list, "--conductor-list"):
            for ns in ns_list:
                bound = theorem_bound("B", conductor=f, N_S=ns, d_K=args.dk,
                                      c_constant=cfg.constant("C_B"))
                rows.append(["B", "", "", f, args.dk, "", "", "", "",
                             ns, "", repr(bound)])
    else:
        if not args.q_list:
            raise UsageError("theorem C needs --q-list")
        for q in _parse_floats(args.q_list, "--q-list"):
            for ns in ns_list:
                bound = theorem_bound("C", Q=q, N_S=ns, d=args.d, H=args.H,
                                      R=args.R, epsilon=cfg.epsilon,
                                      c_constant=cfg.constant("C_C"))
                rows.append(["C", "", "", "", "", q, args.d,
                             "" if args.H is None else args.H, args.R,
                             ns, cfg.epsilon, repr(bound)])
    _emit_csv(cfg, "bound-table", header, rows, args.out)
    return 0


def _cmd_estimation_table(args, cfg: Config) -> int:
    constants = {k: v for k, v in cfg.constants if k in CONSTANT_NAMES}
    inp = EstimationInput(d_L=args.dl, n_L=args.nl,
                          n=args.n if args.n is not None else args.nl,
                          N_S=args.ns, beta0=args.beta0, x=args.x, y=args.y,
                          delta=args.delta, constants=constants)
    rep = estimation_report(inp, args.kernel_index)
    leading = rep["leading"]
    rows = []
    for term in rep["terms"]:
        ratio = term["value"] / leading if leading else float("inf")
        rows.append([term["name"], repr(float(term["value"])),
                     repr(float(ratio)), int(term["counted"])])
    rows.append(["competitor_total", repr(float(rep["competitor_total"])),
                 repr(float(rep["competitor_total"] / leading)) if leading
                 else "inf", 1])
    rows.append(["dominates", int(rep["dominates"]), "", ""])
    _emit_csv(cfg, "estimation-table", ["term", "value", "ratio", "counted"],
              rows, args.out)
    return 0


def _cmd_fit_constants(args, cfg: Config) -> int:
    try:
        with open(args.input, encoding="ascii") as fh:
            lines = [line for line in fh if not line.startswith("#")]
    except OSError as exc:
        raise UsageError(f"cannot read {args.input}: {exc}") from None
    rows = list(csv.DictReader(lines))
    if not rows:
        raise UsageError(f"no data rows in {args.input}")
    try:
        primes = [float(r["witness_prime"]) for r in rows]
        bases = [float(r["bound_value"]) for r in rows]
    except (KeyError, TypeError, ValueError):
        raise UsageError(
            f"{args.input} needs witness_prime and bound_value columns"
        ) from None
    if args.form in ("A", "B"):
        # exponent fit: the bound is base^C, so compare logs
        values = [float(np.log(p)) for p in primes]
        shapes = [float(np.log(b)) for b in bases]
    else:
        # theorem C carries a multiplicative constant
        values = primes
        shapes = bases
    fit = implied_constant_fit(values, shapes)
    body = {"form": args.form, "input": args.input}
    body.update({k: float(v) for k, v in fit.items()})
    _emit_json(cfg, "fit-constants", body, args.out)
    return 0


# ---------------------------------------------------------------------------
# parser

def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key=value config file")
    common.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override a config entry (repeatable)")
    common.add_argument("--out", help="write the report here instead of stdout")

    parser = argparse.ArgumentParser(
        prog="witnesskit",
        description="Batch checks and witness searches for Dirichlet data.")
    sub = parser.add_subparsers(dest="command", required=True)

    def char_flags(p, second=False):
        tail = "2" if second else ""
        p.add_argument(f"--modulus{tail}", type=int, required=not second,
                       default=1 if second else None,
                       help=f"character modulus{' (second)' if second else ''}")
        p.add_argument(f"--char{tail}", default="principal",
                       help="principal | odd | even | exponent list")

    p = sub.add_parser("witness-char", parents=[common],
                       help="least prime where a character is nontrivial")
    char_flags(p)
    p.add_argument("--exclude", help="comma-separated excluded primes")
    p.add_argument("--cap", type=int, help="search ceiling override")
    p.set_defaults(func=_cmd_witness_char)

    p = sub.add_parser("witness-pair", parents=[common],
                       help="least prime distinguishing two characters")
    char_flags(p)
    char_flags(p, second=True)
    p.add_argument("--exclude")
    p.add_argument("--cap", type=int)
    p.set_defaults(func=_cmd_witness_pair)

    p = sub.add_parser("witness-chebotarev", parents=[common],
                       help="least unramified prime landing in a given class")
    p.add_argument("--conductor", type=int, required=True,
                   help="presentation modulus n")
    p.add_argument("--subgroup", required=True,
                   help="comma-separated generators of H <= (Z/n)*")
    p.add_argument("--target-class", type=int, required=True)
    p.add_argument("--exclude")
    p.add_argument("--cap", type=int)
    p.set_defaults(func=_cmd_witness_chebotarev)

    p = sub.add_parser("explicit-formula", parents=[common],
                       help="prime side versus contour side of the kernel sum")
    char_flags(p)
    p.add_argument("--kernel", choices=("K1", "K2"), required=True)
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--y", type=float)
    p.add_argument("--cutoff", type=int)
    p.add_argument("--tol", type=float, default=1e-6)
    p.set_defaults(func=_cmd_explicit_formula)

    p = sub.add_parser("zero-scan", parents=[common],
                       help="scan and cache certified critical-line zeros")
    char_flags(p)
    p.add_argument("--height", type=float)
    p.add_argument("--cache", help="cache file override")
    p.set_defaults(func=_cmd_zero_scan)

    p = sub.add_parser("landau-check", parents=[common],
                       help="direct smoothed sum versus shifted-contour route")
    char_flags(p)
    char_flags(p, second=True)
    p.add_argument("--exclude")
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--H", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--tol", type=float, default=1e-6)
    p.set_defaults(func=_cmd_landau_check)

    p = sub.add_parser("schur-check", parents=[common],
                       help="positivity of pair-coefficient prime terms")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--max-shift", type=float, default=0.0,
                   help="sample off-unitary classes up to this bound")
    p.set_defaults(func=_cmd_schur_check)

    p = sub.add_parser("bound-table", parents=[common],
                       help="tabulate least-witness bound values")
    p.add_argument("--theorem", choices=("A", "B", "C"), required=True)
    p.add_argument("--dl-list", help="d_L values (theorem A)")
    p.add_argument("--nl", type=int, default=2, help="degree n_L (theorem A)")
    p.add_argument("--conductor-list", help="conductors (theorem B)")
    p.add_argument("--dk", type=float, default=1.0,
                   help="base-field discriminant (theorem B)")
    p.add_argument("--q-list", help="extended conductors (theorem C)")
    p.add_argument("--d", type=int, default=1, help="degree (theorem C)")
    p.add_argument("--H", type=float, help="shift height (theorem C, d > 1)")
    p.add_argument("--R", type=float, default=0.0,
                   help="eigenvalue bound (theorem C)")
    p.add_argument("--ns-list", default="1", help="excluded-norm values")
    p.set_defaults(func=_cmd_bound_table)

    p = sub.add_parser("estimation-table", parents=[common],
                       help="leading term versus competitors in the bound chain")
    p.add_argument("--dl", type=float, required=True)
    p.add_argument("--nl", type=int, required=True)
    p.add_argument("--n", type=float, help="prefactor degree, defaults to --nl")
    p.add_argument("--ns", type=float, default=1.0)
    p.add_argument("--beta0", type=float, required=True)
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--y", type=float)
    p.add_argument("--delta", type=float, default=1.0)
    p.add_argument("--kernel-index", type=int, default=1)
    p.set_defaults(func=_cmd_estimation_table)

    p = sub.add_parser("fit-constants", parents=[common],
                       help="fit the implied constant from a sweep CSV")
    p.add_argument("--input", required=True,
                   help="CSV with witness_prime and bound_value columns")
    p.add_argument("--form", choices=("A", "B", "C"), required=True)
    p.set_defaults(func=_cmd_fit_constants)

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = _load_cfg(args)
        return args.func(args, cfg)
    except (UsageError, DomainError, ConstructionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (AccuracyError, CapExhaustedError, CertificationError,
            CoverageError, IdentityViolationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ToolkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
