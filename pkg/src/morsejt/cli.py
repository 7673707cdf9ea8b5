"""Command-line driver: one JSON config per run, CSV and JSON reports.

Subcommands and their CSV columns:

  levels       n, s, energy
  verify       name, passed, max_deviation, tolerance, informational
  series       M_inner, L_outer, frobenius_error, classification
  coherent     branch, n1, n2, re, im
  pt           branch, E0, EJT, E, block_min, block_max
  ejt-formula  value, diverged, inner_diverged, outer_diverged
  diag         kappa_or_nu, level_index, energy, degeneracy
  limit        nu, value, harmonic, deviation
  sweep        kappa_or_nu, exact, pt, deviation

Config keys (JSON):

  morse       {m, V0, alpha, hbar}  or  {nu, hbar_Omega [, alpha, hbar]}
  coupling    {kappa, form, melec}
  coherent    {beta, n, z, Nphi}
  truncation  {M_inner, L_outer [, resum]}
  sweep       {kappa: [...]}  or  {nu: [...]}
  limit       {observable}
  basis       {max_dim}   per-mode states kept in vibronic builds (default 24)
  output      {dir, formats}

Override any key with --set dotted.key=value (value parsed as JSON when
possible).  Exit status: 0 success, 1 invalid config, 2 failed checks.
"""

from __future__ import annotations

import argparse
import copy
import csv
import datetime as _dt
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import CheckFailed, ConfigInvalid, MorseJTError
from .exactdiag import compare_pt_vs_exact, diagonalize, full_hamiltonian, harmonic_limit_scan
from .morse_core import MorseParams, levels, morse_state, overlap_matrix
from .operator_series import SeriesTruncation, convergence_report, radius_ok
from .su11_algebra import check_commutators, differential_consistency, vibrational_hamiltonian
from .vibronic import (FORMS, CoherentSpec, ElectronicDoublet, basis_state, build_hjt,
                       coherent_state, coherent_state_operator, ejt_closed_form,
                       pt_first_order, state_fidelity)

SUBCOMMANDS = ("levels", "verify", "series", "coherent", "pt", "ejt-formula",
               "diag", "limit", "sweep")
OBSERVABLES = ("level_gap", "x01_element", "jt_ground_shift")
DEFAULT_MAX_DIM = 24

DEFAULTS = {
    "coupling": {"kappa": 0.05, "form": "morse_eq8", "melec": "Dtheta"},
    "coherent": {"beta": "l", "n": 0, "z": 0.5, "Nphi": 64},
    "truncation": {"M_inner": 4, "L_outer": 3, "resum": False},
    "sweep": {},
    "limit": {"observable": "x01_element"},
    "basis": {},
    "output": {"dir": "out", "formats": ["csv", "json"]},
}


@dataclass
class RunConfig:
    morse: dict
    coupling: dict = field(default_factory=lambda: dict(DEFAULTS["coupling"]))
    coherent: dict = field(default_factory=lambda: dict(DEFAULTS["coherent"]))
    truncation: dict = field(default_factory=lambda: dict(DEFAULTS["truncation"]))
    sweep: dict = field(default_factory=dict)
    limit: dict = field(default_factory=lambda: dict(DEFAULTS["limit"]))
    basis: dict = field(default_factory=dict)
    output: dict = field(default_factory=lambda: dict(DEFAULTS["output"]))

    @classmethod
    def from_dict(cls, raw: dict) -> "RunConfig":
        if not isinstance(raw, dict):
            raise ConfigInvalid("config root must be an object")
        unknown = set(raw) - {"morse", *DEFAULTS}
        if unknown:
            raise ConfigInvalid(f"unknown config section(s): {sorted(unknown)}")
        if "morse" not in raw:
            raise ConfigInvalid("missing required section 'morse'")
        merged = {"morse": dict(raw["morse"])}
        for key, default in DEFAULTS.items():
            section = raw.get(key, {})
            if not isinstance(section, dict):
                raise ConfigInvalid(f"section '{key}' must be an object")
            merged[key] = {**default, **section}
        cfg = cls(**merged)
        cfg.validate()
        return cfg

    def to_dict(self) -> dict:
        return copy.deepcopy(asdict(self))

    # -------------------------------------------------------------- validation

    def validate(self) -> None:
        mo = self.morse
        physical = {"m", "V0", "alpha"} & set(mo)
        reduced = {"nu", "hbar_Omega"} & set(mo)
        if physical and reduced:
            raise ConfigInvalid("morse: give either {m, V0, alpha, hbar} or {nu, hbar_Omega}, not both")
        if physical and physical != {"m", "V0", "alpha"}:
            raise ConfigInvalid("morse: physical group needs m, V0 and alpha")
        if reduced and reduced != {"nu", "hbar_Omega"}:
            raise ConfigInvalid("morse: reduced group needs nu and hbar_Omega")
        if not physical and not reduced:
            raise ConfigInvalid("morse: no parameter group given")
        extra = set(mo) - {"m", "V0", "alpha", "hbar", "nu", "hbar_Omega"}
        if extra:
            raise ConfigInvalid(f"morse: unknown key(s) {sorted(extra)}")
        for key, val in mo.items():
            _positive(f"morse.{key}", val)

        c = self.coupling
        _number("coupling.kappa", c["kappa"])
        if c["kappa"] < 0:
            raise ConfigInvalid("coupling.kappa must be >= 0")
        if c["form"] not in FORMS:
            raise ConfigInvalid(f"coupling.form must be one of {FORMS}")
        _melec(c["melec"])

        co = self.coherent
        if co["beta"] not in ("l", "u"):
            raise ConfigInvalid("coherent.beta must be 'l' or 'u'")
        if co["z"] not in (0, 0.5):
            raise ConfigInvalid(f"coherent.z must be 0 or 0.5, got {co['z']!r}")
        _integer("coherent.n", co["n"], 0)
        _integer("coherent.Nphi", co["Nphi"], 8)
        if co["Nphi"] % 2:
            raise ConfigInvalid("coherent.Nphi must be even")

        tr = self.truncation
        _integer("truncation.M_inner", tr["M_inner"], 0)
        _integer("truncation.L_outer", tr["L_outer"], 1)
        if not isinstance(tr.get("resum", False), bool):
            raise ConfigInvalid("truncation.resum must be true or false")

        sw = self.sweep
        if set(sw) - {"kappa", "nu"}:
            raise ConfigInvalid("sweep accepts only 'kappa' or 'nu'")
        if len(sw) > 1:
            raise ConfigInvalid("sweep: give either kappa or nu, not both")
        for key, vals in sw.items():
            if not isinstance(vals, list) or not vals:
                raise ConfigInvalid(f"sweep.{key} must be a non-empty list")
            for v in vals:
                _positive(f"sweep.{key}", v)

        if self.limit["observable"] not in OBSERVABLES:
            raise ConfigInvalid(f"limit.observable must be one of {OBSERVABLES}")
        if "max_dim" in self.basis:
            _integer("basis.max_dim", self.basis["max_dim"], 1)

        out = self.output
        fmts = out["formats"]
        if not isinstance(fmts, list) or not fmts or set(fmts) - {"csv", "json"}:
            raise ConfigInvalid("output.formats must be a non-empty subset of ['csv', 'json']")

    # -------------------------------------------------------------- builders

    def params(self, nu: float | None = None) -> MorseParams:
        mo = self.morse
        try:
            if nu is not None or "nu" in mo:
                hbar_omega = mo.get("hbar_Omega")
                if hbar_omega is None:
                    hbar_omega = MorseParams(mo["m"], mo["V0"], mo["alpha"], mo.get("hbar", 1.0)).hbar_Omega
                return MorseParams.from_reduced(nu if nu is not None else mo["nu"], hbar_omega,
                                                mo.get("alpha", 1.0), mo.get("hbar", 1.0))
            return MorseParams(mo["m"], mo["V0"], mo["alpha"], mo.get("hbar", 1.0))
        except MorseJTError as exc:
            raise ConfigInvalid(f"morse: {exc}") from exc

    def doublet(self) -> ElectronicDoublet:
        return _melec(self.coupling["melec"])

    def truncation_spec(self) -> SeriesTruncation:
        tr = self.truncation
        return SeriesTruncation(tr["M_inner"], tr["L_outer"], bool(tr.get("resum", False)))

    def coherent_spec(self) -> CoherentSpec:
        co = self.coherent
        return CoherentSpec(co["beta"], co["n"], float(co["z"]), float(self.coupling["kappa"]),
                            co["Nphi"])

    def dim(self, p: MorseParams) -> int:
        return min(p.size, self.basis.get("max_dim", DEFAULT_MAX_DIM))


def _number(key, val):
    if isinstance(val, bool) or not isinstance(val, (int, float)) or not math.isfinite(val):
        raise ConfigInvalid(f"{key} must be a finite number")


def _positive(key, val):
    _number(key, val)
    if val <= 0:
        raise ConfigInvalid(f"{key} must be positive, got {val!r}")


def _integer(key, val, minimum):
    if isinstance(val, bool) or not isinstance(val, int) or val < minimum:
        raise ConfigInvalid(f"{key} must be an integer >= {minimum}")


def _melec(val) -> ElectronicDoublet:
    try:
        if isinstance(val, str):
            return ElectronicDoublet.named(val)
        return ElectronicDoublet(np.asarray(val, dtype=float))
    except (ValueError, TypeError) as exc:
        raise ConfigInvalid(f"coupling.melec: {exc}") from exc


def apply_override(raw: dict, assignment: str) -> None:
    if "=" not in assignment:
        raise ConfigInvalid(f"--set expects key=value, got {assignment!r}")
    key, text = assignment.split("=", 1)
    try:
        value = json.loads(text)
    except json.JSONDecodeError:
        value = text
    node = raw
    parts = key.split(".")
    for part in parts[:-1]:
        node = node.setdefault(part, {})
        if not isinstance(node, dict):
            raise ConfigInvalid(f"--set {key}: '{part}' is not a section")
    node[parts[-1]] = value


def load_config(path: str | None, overrides: list[str]) -> RunConfig:
    raw: dict = {}
    if path:
        try:
            raw = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigInvalid(f"cannot read config {path}: {exc}") from exc
    for item in overrides:
        apply_override(raw, item)
    return RunConfig.from_dict(raw)


# ---------------------------------------------------------------- reports


def fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def to_csv(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        val = float(obj)
        return val if math.isfinite(val) else repr(val)
    if isinstance(obj, complex):
        return {"re": _jsonable(obj.real), "im": _jsonable(obj.imag)}
    return obj


@dataclass
class Report:
    header: list[str]
    rows: list[list]
    results: dict
    checks: list[dict] = field(default_factory=list)


def _check(name, deviation, tol, informational=False):
    return {"name": name, "max_deviation": float(deviation), "tolerance": tol,
            "passed": bool(deviation < tol), "informational": informational}


# ---------------------------------------------------------------- subcommands


def cmd_levels(cfg: RunConfig, scale: float) -> Report:
    p = cfg.params()
    e = levels(p)
    rows = [[n, p.s(n), e[n] / scale] for n in range(p.size)]
    return Report(["n", "s", "energy"], rows,
                  {"nu": p.nu, "hbar_Omega": p.hbar_Omega, "omega_harm": p.omega_harm,
                   "N_floor": p.N_floor, "N_eff": p.N_eff})


def cmd_verify(cfg: RunConfig, scale: float) -> Report:
    p = cfg.params()
    dim = cfg.dim(p)
    checks = []
    gram = overlap_matrix(p, dim)
    checks.append(_check("orthonormality", np.max(np.abs(gram - np.eye(dim))), 1e-8))
    if dim >= 3:
        for row in check_commutators(p, dim)["checks"]:
            checks.append(_check(row["name"], row["max_deviation"], row["tolerance"]))
    hv = vibrational_hamiltonian(p, dim).data
    e = levels(p)[:dim]
    checks.append(_check("H_v identity", np.max(np.abs(hv - np.diag(np.add.outer(e, e).ravel()))),
                         1e-12 * max(1.0, p.hbar_Omega * p.nu ** 2)))
    diff_dev = 0.0
    b0_dev = 0.0
    for n in range(dim):
        for op in ("b+", "b-"):
            if op == "b+" and n + 1 >= dim:
                continue
            diff_dev = max(diff_dev, differential_consistency(p, n, op).residual)
        b0_dev = max(b0_dev, differential_consistency(p, n, "b0").residual)
    if dim >= 2:
        checks.append(_check("differential b+/b-", diff_dev, 1e-6))
    # the differential b0 form is not diagonal; recorded, not gated
    checks.append(_check("differential b0", b0_dev, 1e-6, informational=True))
    kappa = cfg.coupling["kappa"] or 1.0
    for form in ("harmonic_eq3", "morse_eq8", "morse_structural"):
        if form == "harmonic_eq3" and dim < 2:
            continue
        h = build_hjt(p, kappa, form, cfg.doublet(), dim=dim)
        checks.append(_check(f"hermiticity {form}", h.hermiticity_error(), 1e-12))
    ratios = [morse_state(p, n).closed_ratio for n in range(dim)]
    rows = [[c["name"], c["passed"], c["max_deviation"], c["tolerance"], c["informational"]]
            for c in checks]
    return Report(["name", "passed", "max_deviation", "tolerance", "informational"], rows,
                  {"nu": p.nu, "dim": dim, "c_closed_over_c_numeric": ratios}, checks)


def cmd_series(cfg: RunConfig, scale: float) -> Report:
    p = cfg.params()
    base = cfg.truncation_spec()
    truncs = [SeriesTruncation(m, base.L_outer, base.resum) for m in range(base.M_inner + 1)]
    rows = convergence_report(p, truncs, cfg.dim(p))
    return Report(["M_inner", "L_outer", "frobenius_error", "classification"],
                  [[r.M_inner, r.L_outer, r.frobenius_error, r.classification] for r in rows],
                  {"nu": p.nu, "radius_ok": radius_ok(p, cfg.dim(p))})


def cmd_coherent(cfg: RunConfig, scale: float) -> Report:
    p = cfg.params()
    spec = cfg.coherent_spec()
    dim = cfg.dim(p)
    state = coherent_state(p, spec, dim=dim)
    direct = coherent_state_operator(p, spec, dim=dim)
    exact = coherent_state(p, spec, convention="exact", dim=dim)
    other = coherent_state(p, CoherentSpec(spec.beta, spec.n, 0.5 - spec.z, spec.kappa, spec.Nphi), dim=dim)
    rows = [[b, n1, n2, c.real, c.imag] for (b, n1, n2), c in zip(state.labels(), state.coeffs)]
    results = {
        "norm_factor": state.norm_factor,
        "expansion": state.info["expansion"],
        "phi_rule_exact": state.info["phi_exact"],
        "fidelity_vs_operator_build": state_fidelity(state, direct),
        "fidelity_exact_convention_vs_operator_build": state_fidelity(exact, direct),
        "overlap_with_other_z": abs(np.vdot(state.coeffs, other.coeffs)),
    }
    return Report(["branch", "n1", "n2", "re", "im"], rows, results)


def cmd_pt(cfg: RunConfig, scale: float) -> Report:
    p = cfg.params()
    dim = cfg.dim(p)
    co = cfg.coherent
    form = cfg.coupling["form"]
    t = cfg.truncation_spec() if form == "morse_eq9_series" else None
    rows = []
    results = {}
    for beta in ("l", "u"):
        spec = CoherentSpec(beta, co["n"], float(co["z"]), 0.0, co["Nphi"])
        state = coherent_state(p, spec, dim=dim)
        res = pt_first_order(p, cfg.coupling["kappa"], form, cfg.doublet(), state, t)
        rows.append([beta, res.E0 / scale, res.EJT / scale, res.E / scale,
                     np.min(res.block_ejt) / scale, np.max(res.block_ejt) / scale])
        results[beta] = {"block_ejt": res.block_ejt / scale, "unresolved": res.unresolved,
                         "psi1_norm": res.psi1.norm}
    return Report(["branch", "E0", "EJT", "E", "block_min", "block_max"], rows, results)


def cmd_ejt_formula(cfg: RunConfig, scale: float) -> Report:
    p = cfg.params()
    res = ejt_closed_form(p, cfg.coherent_spec(), cfg.doublet(), cfg.truncation_spec())
    return Report(["value", "diverged", "inner_diverged", "outer_diverged"],
                  [[res.value / scale, res.diverged, res.inner_diverged, res.outer_diverged]],
                  {"per_p_bracket": list(res.per_p_bracket)})


def _spectrum_rows(cfg, p, kappa, label, scale):
    form = cfg.coupling["form"]
    if form == "morse_eq9_series":
        raise ConfigInvalid("diag needs a Hermitian form; morse_eq9_series is diagnostic only")
    h = full_hamiltonian(p, kappa, form, cfg.doublet(), cfg.dim(p))
    spec = diagonalize(h, p.hbar_Omega)
    return [[label, i, v / scale, spec.degeneracy(i)] for i, v in enumerate(spec.eigenvalues)]


def cmd_diag(cfg: RunConfig, scale: float) -> Report:
    p = cfg.params()
    kappa = cfg.coupling["kappa"]
    rows = _spectrum_rows(cfg, p, kappa, kappa, scale)
    return Report(["kappa_or_nu", "level_index", "energy", "degeneracy"], rows,
                  {"nu": p.nu, "kappa": kappa})


def cmd_limit(cfg: RunConfig, scale: float) -> Report:
    nus = cfg.sweep.get("nu", [50, 200, 800])
    scan = harmonic_limit_scan(nus, cfg.limit["observable"])
    rows = [[r["nu"], r["value"], r["harmonic"], r["deviation"]] for r in scan["rows"]]
    return Report(["nu", "value", "harmonic", "deviation"], rows,
                  {"observable": scan["observable"], "fitted_order": scan["order"]})


def cmd_sweep(cfg: RunConfig, scale: float) -> Report:
    form = cfg.coupling["form"]
    if form == "morse_eq9_series":
        raise ConfigInvalid("sweep needs a Hermitian form; morse_eq9_series is diagnostic only")
    rows = []
    results = {}
    if "nu" in cfg.sweep:
        kappa = cfg.coupling["kappa"]
        for nu in cfg.sweep["nu"]:
            p = cfg.params(nu)
            rep = compare_pt_vs_exact(p, form, cfg.doublet(), [kappa], cfg.dim(p))["rows"][0]
            rows.append([nu, rep["exact"] / scale, rep["pt"] / scale, rep["deviation"] / scale])
    else:
        p = cfg.params()
        kappas = cfg.sweep.get("kappa", [0.01, 0.02, 0.04])
        rep = compare_pt_vs_exact(p, form, cfg.doublet(), kappas, cfg.dim(p))
        rows = [[r["kappa"], r["exact"] / scale, r["pt"] / scale, r["deviation"] / scale]
                for r in rep["rows"]]
        results["loglog_slope"] = rep["slope"]
    return Report(["kappa_or_nu", "exact", "pt", "deviation"], rows, results)


HANDLERS = {
    "levels": cmd_levels, "verify": cmd_verify, "series": cmd_series,
    "coherent": cmd_coherent, "pt": cmd_pt, "ejt-formula": cmd_ejt_formula,
    "diag": cmd_diag, "limit": cmd_limit, "sweep": cmd_sweep,
}


def envelope(cfg: RunConfig, sub: str, report: Report, reduced: bool) -> dict:
    return {
        "tool_version": __version__,
        "subcommand": sub,
        "config": cfg.to_dict(),
        "reduced_units": reduced,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(),
        "results": _jsonable({"columns": report.header, "rows": report.rows, **report.results}),
        "checks": _jsonable(report.checks),
    }


def write_outputs(cfg: RunConfig, sub: str, report: Report, reduced: bool) -> list[Path]:
    out_dir = Path(cfg.output["dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    if "csv" in cfg.output["formats"]:
        path = out_dir / f"{sub}.csv"
        path.write_text(to_csv(report.header, report.rows))
        written.append(path)
    if "json" in cfg.output["formats"]:
        path = out_dir / f"{sub}.json"
        path.write_text(json.dumps(envelope(cfg, sub, report, reduced), indent=2) + "\n")
        written.append(path)
    return written


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="morsejt", description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        sp = sub.add_parser(name, help=f"run the {name} report")
        sp.add_argument("config", nargs="?", help="JSON config file")
        sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config key by dotted path")
        sp.add_argument("--reduced", action="store_true",
                        help="report energies in units of hbar*Omega")
        sp.add_argument("--out", help="output directory (overrides output.dir)")
    return parser


def run(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        overrides = list(args.set)
        if args.out:
            overrides.append(f"output.dir={json.dumps(args.out)}")
        cfg = load_config(args.config, overrides)
        p = cfg.params()
        scale = p.hbar_Omega if args.reduced else 1.0
        report = HANDLERS[args.subcommand](cfg, scale)
        paths = write_outputs(cfg, args.subcommand, report, args.reduced)
    except ConfigInvalid as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except MorseJTError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    failed = [c["name"] for c in report.checks if not c["passed"] and not c["informational"]]
    for path in paths:
        print(path)
    if failed:
        print(f"{CheckFailed.__name__}: {', '.join(failed)}", file=sys.stderr)
        return 2
    return 0


def main() -> None:
    sys.exit(run())
