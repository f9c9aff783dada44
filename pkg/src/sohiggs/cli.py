"""Command line driver: every check as a subcommand with seeded, reproducible reports.

Reports are JSON (default) or CSV.  They go to ``--output`` if given,
otherwise to ``$SOHIGGS_OUTPUT_DIR/<command>.<format>`` when that variable
is set, otherwise to stdout.  The exit status is 1 when any row failed.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import random
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable

from . import bundles as B
from . import cohomology as C
from .lie_so import Family, GroupKind, in_group
from .positivity import (
    NotPositive,
    cones,
    embedding_positivity_check,
    factorize,
    opposite_flag,
    random_cone_value,
    random_params,
    random_rational,
    semigroup_element,
    standard_flag,
    translate_flag,
    triple_is_positive,
    word_element,
)
from .weyl import audit_so_nn, longest_word, verify_longest

SCHEMA = "sohiggs-report/1"
OUTPUT_ENV = "SOHIGGS_OUTPUT_DIR"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    n_range: tuple[int, ...] = (3,)
    g_range: tuple[int, ...] = (2,)
    samples: int = 100
    seed: int = 0
    group: str | None = None
    output: str | None = None
    fmt: str = "json"
    bound: int = 100

    def __post_init__(self):
        if not self.n_range or not self.g_range:
            raise ConfigError("n and g ranges must be nonempty")
        if self.fmt not in ("json", "csv"):
            raise ConfigError(f"unknown format {self.fmt!r}")
        if self.samples < 0:
            raise ConfigError("samples must be nonnegative")


@dataclass
class Report:
    command: str
    config: dict
    rows: list = field(default_factory=list)

    @property
    def failures(self) -> int:
        return sum(1 for r in self.rows if not r.get("ok", True))

    def add(self, **row):
        self.rows.append(row)

    def to_json(self) -> str:
        payload = {"schema": SCHEMA, "command": self.command, "config": self.config,
                   "failures": self.failures, "rows": self.rows}
        return json.dumps(payload, indent=2, sort_keys=True, default=str) + "\n"

    def to_csv(self) -> str:
        keys = sorted({k for r in self.rows for k in r})
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
        w.writeheader()
        for r in self.rows:
            w.writerow({k: r.get(k, "") for k in keys})
        return buf.getvalue()


def _parse_range(text: str) -> tuple[int, ...]:
    try:
        if "-" in text.strip("-"):
            lo, hi = text.split("-", 1)
            vals = tuple(range(int(lo), int(hi) + 1))
        else:
            vals = tuple(int(x) for x in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad range {text!r}") from exc
    if not vals:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return vals


def _kinds(cfg: RunConfig, families=tuple(Family)) -> list[GroupKind]:
    fams = families if cfg.group is None else (Family(cfg.group),)
    return [GroupKind(f, n) for f in fams for n in cfg.n_range]


def _fmt(x) -> str:
    if isinstance(x, tuple):
        return "(" + ",".join(_fmt(v) for v in x) + ")"
    return str(x)


# ----------------------------------------------------------------- commands


def cmd_census(cfg: RunConfig, rep: Report) -> None:
    for n in cfg.n_range:
        for g in cfg.g_range:
            try:
                c = C.census(n, g)
            except (C.Mismatch, C.UnsupportedRank) as exc:
                rep.add(n=n, g=g, ok=False, error=str(exc))
                continue
            rep.add(n=n, g=g, total=c.total, closed_form=C.census_formula_closed(n, g),
                    summed=C.census_formula_sum(n, g), caveat=c.caveat or "",
                    ok=c.total == C.census_formula_closed(n, g) == C.census_formula_sum(n, g),
                    **{f"count_{k}": v for k, v in c.totals.items() if k != "total"})


def cmd_dims(cfg: RunConfig, rep: Report) -> None:
    for n in cfg.n_range:
        for g in cfg.g_range:
            e = C.expected_dim(n, g)
            totals = {C.component_dims(n, g, d).total for d in range(1, n * (2 * g - 2) + 1)}
            ok = totals == {n * (2 * n + 1) * (g - 1)} and e.real_moduli_dim == e.real_differentials_dim
            rep.add(n=n, g=g, expected_dim=e.real_moduli_dim, differentials_complex=e.complex_differentials_dim,
                    component_totals=sorted(totals)[0] if len(totals) == 1 else str(sorted(totals)), ok=ok)


def cmd_hypercoh(cfg: RunConfig, rep: Report) -> None:
    for n in cfg.n_range:
        for g in cfg.g_range:
            for tor in ("generic", "square-trivial", "trivial"):
                lo, hi = C.grade_range(n)
                for k in range(lo, hi + 1):
                    a = C.hypercoh_route_a(n, g, k, tor)
                    b = C.hypercoh_route_b(n, g, k, tor)
                    chi = C.euler_characteristic(n, g, k, tor)
                    ok = (a.h0, a.h1, a.h2) == (b.h0, b.h1, b.h2) and a.h2 == 0 and chi == a.h0 - a.h1 + a.h2
                    rep.add(n=n, g=g, torsion=tor, k=k, h0=a.h0, h1=a.h1, h2=a.h2,
                            h1_closed_form=b.h1, euler=chi, ok=ok)


def cmd_weyl_verify(cfg: RunConfig, rep: Report) -> None:
    for kind in _kinds(cfg):
        r = verify_longest(kind, longest_word(kind))
        row = dict(group=kind.family.value, n=kind.n, label=kind.label(), reduced=r.is_reduced,
                   longest=r.is_longest, length=r.length, target=r.target_length, ok=r.ok())
        if kind.family is Family.SO_n_n:
            row["literal_verdict"] = audit_so_nn(kind.n).literal_verdict
        rep.add(**row)


def cmd_positivity_closure(cfg: RunConfig, rep: Report) -> None:
    rng = random.Random(cfg.seed)
    for kind in _kinds(cfg):
        good = 0
        for _ in range(cfg.samples):
            p, q = random_params(kind, rng, cfg.bound), random_params(kind, rng, cfg.bound)
            g = semigroup_element(kind, p)
            roundtrip = factorize(kind, g) == p
            prod = g @ semigroup_element(kind, q)
            res = factorize(kind, prod)
            good += int(roundtrip and in_group(prod, kind) and not isinstance(res, NotPositive))
        rep.add(group=kind.family.value, n=kind.n, samples=cfg.samples, passed=good, ok=good == cfg.samples)


def cmd_embed_check(cfg: RunConfig, rep: Report) -> None:
    rng = random.Random(cfg.seed)
    for kind in _kinds(cfg, (Family.SO_n_nminus1, Family.SO_n_n)):
        good = 0
        for _ in range(cfg.samples):
            r = embedding_positivity_check(kind, random_params(kind, rng, cfg.bound))
            good += int(r.ok())
        rep.add(source=kind.family.value, n=kind.n, samples=cfg.samples, passed=good, ok=good == cfg.samples)


def _negative_triple(kind: GroupKind, rng, bound: int):
    cs = cones(kind)
    j = rng.choice(sorted(cs))
    v = random_cone_value(cs[j], rng, bound)
    neg = tuple(-x for x in v) if isinstance(v, tuple) else -v
    return translate_flag(word_element(kind, [(j, neg)]), opposite_flag(kind))


def cmd_triple_check(cfg: RunConfig, rep: Report) -> None:
    rng = random.Random(cfg.seed)
    for kind in _kinds(cfg):
        xp, xm = standard_flag(kind), opposite_flag(kind)
        pos = sum(
            triple_is_positive(xp, translate_flag(semigroup_element(kind, random_params(kind, rng, cfg.bound)), xm), xm)
            for _ in range(cfg.samples)
        )
        neg = sum(not triple_is_positive(xp, _negative_triple(kind, rng, cfg.bound), xm) for _ in range(cfg.samples))
        rep.add(group=kind.family.value, n=kind.n, samples=cfg.samples, positive_accepted=pos,
                negative_rejected=neg, ok=pos == neg == cfg.samples)


def cmd_stability(cfg: RunConfig, rep: Report) -> None:
    for n in cfg.n_range:
        for g in cfg.g_range:
            top = n * (2 * g - 2)
            for d in range(1, top + 1):
                hb = B.build_psi_d(n, d, g, mu=True)
                s, sb = hb.stability(), hb.stability(brute_force=True)
                rep.add(n=n, g=g, family="psi_d", case=f"d={d}", classification=s.classification,
                        witness=";".join(s.witness_labels), ok=s == sb and s.classification == "stable")
            if n >= 2:
                for mu in (False, True):
                    for nu in (False, True):
                        hb = B.build_psi_0(n, g, mu=mu, nu=nu)
                        s, sb = hb.stability(), hb.stability(brute_force=True)
                        expect = "strictly-polystable" if not (mu or nu) else ("stable" if mu and nu else "unstable")
                        rep.add(n=n, g=g, family="psi_0", case=f"mu={int(mu)},nu={int(nu)}",
                                classification=s.classification, witness=";".join(s.witness_labels),
                                ok=s == sb and s.classification == expect)
        for g in cfg.g_range:
            for d in range(1, 4 * g + 1):
                got = B.so12_admits_polystable(d, g)
                rep.add(n=1, g=g, family="so12", case=f"d={d}", classification=str(got),
                        witness="", ok=got == (d <= 2 * g - 2))


def _random_psi_datum(n: int, g: int, rng, bound: int, d: int | None = None):
    r = lambda: random_rational(rng, bound, positive=False)
    top = n * (2 * g - 2)
    d = rng.randint(1, top) if d is None else d
    return B.build_psi_d(n, d, g, mu=r(), nu=r(), q=[r() for _ in range(n - 1)]).datum


def cmd_gauge_check(cfg: RunConfig, rep: Report) -> None:
    rng = random.Random(cfg.seed)
    for n in cfg.n_range:
        for g in cfg.g_range:
            good = 0
            for _ in range(cfg.samples):
                dat = _random_psi_datum(n, g, rng, cfg.bound)
                lam = random_rational(rng, cfg.bound, positive=False)
                a = B.apply_gauge(B.scaling_gauge(n, lam), dat)
                s = B.apply_gauge(B.switching_gauge(n), dat)
                ok = (a.to_record() == B.scaling_formula(dat, lam).to_record()
                      and s.to_record() == B.switching_formula(dat).to_record()
                      and B.orbit_equal(dat, B.apply_gauge(B.scaling_gauge(n, 1), dat)))
                good += int(ok)
            rep.add(n=n, g=g, samples=cfg.samples, passed=good, ok=good == cfg.samples)


def cmd_invariants_check(cfg: RunConfig, rep: Report) -> None:
    from dataclasses import replace

    rng = random.Random(cfg.seed)
    for n in cfg.n_range:
        for g in cfg.g_range:
            good = 0
            for _ in range(cfg.samples):
                dat = _random_psi_datum(n, g, rng, cfg.bound)
                inv = B.hitchin_invariants(dat)
                lam = random_rational(rng, cfg.bound, positive=False)
                scaled = replace(dat, mu=B.Section.named("mu", value=dat.mu.evaluate() * lam),
                                 nu=B.Section.named("nu", value=dat.nu.evaluate() / lam))
                switched = B.apply_gauge(B.switching_gauge(n), dat)
                good += int(inv == B.hitchin_invariants(scaled) == B.hitchin_invariants(switched))
            rep.add(n=n, g=g, samples=cfg.samples, passed=good, ok=good == cfg.samples)


COMMANDS: dict[str, Callable[[RunConfig, Report], None]] = {
    "census": cmd_census,
    "dims": cmd_dims,
    "hypercoh": cmd_hypercoh,
    "weyl-verify": cmd_weyl_verify,
    "positivity-closure": cmd_positivity_closure,
    "embed-check": cmd_embed_check,
    "triple-check": cmd_triple_check,
    "stability": cmd_stability,
    "gauge-check": cmd_gauge_check,
    "invariants-check": cmd_invariants_check,
}


def run(cfg: RunConfig, stream=None) -> int:
    if cfg.command not in COMMANDS:
        raise ConfigError(f"unknown command {cfg.command!r}")
    config = {"n": list(cfg.n_range), "g": list(cfg.g_range), "samples": cfg.samples, "seed": cfg.seed,
              "group": cfg.group, "bound": cfg.bound}
    rep = Report(cfg.command, config)
    COMMANDS[cfg.command](cfg, rep)
    text = rep.to_json() if cfg.fmt == "json" else rep.to_csv()
    target = cfg.output
    if target is None and os.environ.get(OUTPUT_ENV):
        target = str(Path(os.environ[OUTPUT_ENV]) / f"{cfg.command}.{cfg.fmt}")
    if target is None:
        (stream or sys.stdout).write(text)
    else:
        Path(target).parent.mkdir(parents=True, exist_ok=True)
        Path(target).write_text(text)
        print(f"{cfg.command}: {len(rep.rows)} rows, {rep.failures} failures -> {target}", file=sys.stderr)
    return 1 if rep.failures else 0


def load_config(path: str) -> RunConfig:
    """Read a JSON run configuration; parse errors carry line and column."""
    text = Path(path).read_text()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    if not isinstance(raw, dict) or "command" not in raw:
        raise ConfigError(f"{path}:1: expected an object with a 'command' key")
    def rng(v, key):
        if isinstance(v, int):
            return (v,)
        if isinstance(v, str):
            return _parse_range(v)
        if isinstance(v, list) and all(isinstance(x, int) for x in v):
            return tuple(v)
        raise ConfigError(f"{path}: bad value for {key!r}: {v!r}")
    known = {"command", "n", "g", "samples", "seed", "group", "output", "format", "bound"}
    extra = set(raw) - known
    if extra:
        raise ConfigError(f"{path}: unknown keys {sorted(extra)}")
    return RunConfig(
        command=raw["command"],
        n_range=rng(raw.get("n", 3), "n"),
        g_range=rng(raw.get("g", 2), "g"),
        samples=int(raw.get("samples", 100)),
        seed=int(raw.get("seed", 0)),
        group=raw.get("group"),
        output=raw.get("output"),
        fmt=raw.get("format", "json"),
        bound=int(raw.get("bound", 100)),
    )


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sohiggs", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    defaults = {
        "census": dict(n="3", g="2"),
        "dims": dict(n="1-6", g="2-6"),
        "hypercoh": dict(n="2-4", g="2-3"),
        "weyl-verify": dict(n="2-8", g="2"),
        "positivity-closure": dict(n="2-4", g="2"),
        "embed-check": dict(n="2-4", g="2"),
        "triple-check": dict(n="2-3", g="2"),
        "stability": dict(n="1-4", g="2-3"),
        "gauge-check": dict(n="1-4", g="2"),
        "invariants-check": dict(n="1-4", g="2"),
    }
    for name, d in defaults.items():
        sp = sub.add_parser(name)
        sp.add_argument("--n", type=_parse_range, default=_parse_range(d["n"]), help="value, list a,b or range a-b")
        sp.add_argument("--g", type=_parse_range, default=_parse_range(d["g"]))
        sp.add_argument("--samples", type=int, default=100)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--bound", type=int, default=100, help="numerator/denominator bound for samples")
        sp.add_argument("--group", choices=[f.value for f in Family])
        sp.add_argument("--format", dest="fmt", choices=["json", "csv"], default="json")
        sp.add_argument("--output")
    rp = sub.add_parser("run", help="run a JSON configuration file")
    rp.add_argument("config")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            cfg = load_config(args.config)
        else:
            cfg = RunConfig(args.command, args.n, args.g, args.samples, args.seed, args.group,
                            args.output, args.fmt, args.bound)
        return run(cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
