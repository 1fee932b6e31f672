"""Command-line interface.

Usage:
    pacverify bound --m 100 --delta 0.05 --method classic
    pacverify bound --m 100 --r-hat 0.05 --method implicit --p-delta 0.5
    pacverify bound --m 100 --method closed-form --hits 250 --m-a 1000 --alpha 0.01
    pacverify confidence --m 100 --r-hat 0.05 --p-delta 0.2127
    pacverify estimate --hits 37 --m-a 200 --alpha 0.05
    pacverify tables table1 --csv
    pacverify validate scenario.json --m 50 --method closed-form --trials 10000
"""

from __future__ import annotations

import csv
import io
import json
import math
import sys

import click

from .classic import Method, RiskQuery, hoeffding_bound
from .conditioned import RegionKnowledge, required_pdelta_for_confidence, updated_confidence
from .numerics import DomainError, SolverConfig, SolverError
from .region import (
    MembershipSample,
    bound_from_knowledge,
    clopper_pearson_lower,
    combined_confidence,
    estimate_pdelta,
)
from .tables import TableId, TableSpec, build_table, format_decrease, parse_decreases
from .validation import (
    ENUMERATION_BUDGET,
    EnumerationBudgetError,
    ScenarioFormatError,
    exact_bound_failure_probability,
    exact_failure_probability,
    load_scenario,
    method_bound_function,
    monte_carlo_coverage,
    region_mass,
    true_risk,
)

__all__ = ["cli", "main"]

EXACT_MAX_M = 10


def _fmt(x) -> str:
    if isinstance(x, bool) or x is None:
        return str(x)
    if isinstance(x, float):
        return f"{x:.6g}"
    return str(x)


def _clean(obj):
    # JSON has no NaN; emit null instead
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def _emit_json(payload: dict) -> None:
    click.echo(json.dumps(_clean(payload), indent=2, sort_keys=True))


def _emit_text(pairs) -> None:
    width = max(len(k) for k, _ in pairs)
    for key, value in pairs:
        click.echo(f"{key:<{width}}  {_fmt(value)}")


def _solver(tol: float | None) -> SolverConfig | None:
    return None if tol is None else SolverConfig(abs_tol=tol)


def _query(m, delta, C, r_hat, M=1) -> RiskQuery:
    return RiskQuery(m=m, delta=delta, C=C, r_hat=r_hat, M=M)


def _knowledge(p_delta, hits, m_a, alpha) -> RegionKnowledge | None:
    if p_delta is None and hits is None and m_a is None:
        return None
    if p_delta is not None:
        if hits is not None or m_a is not None:
            raise DomainError("give either --p-delta or --hits/--m-a/--alpha, not both")
        return RegionKnowledge.exact(p_delta)
    if hits is None or m_a is None:
        raise DomainError("an estimated region needs both --hits and --m-a")
    return RegionKnowledge.estimated(m_a, hits, alpha)


class _Group(click.Group):
    """Turn library domain errors into clean nonzero exits."""

    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except (DomainError, SolverError, ScenarioFormatError, EnumerationBudgetError) as exc:
            raise click.ClickException(str(exc)) from None


_method_choice = click.Choice(["classic", "implicit", "closed-form", "closed_form"])


def _risk_options(f):
    f = click.option("--r-hat", "r_hat", type=float, default=0.0, show_default=True,
                     help="Empirical risk on the evaluating sample.")(f)
    f = click.option("--C", "C", type=float, default=1.0, show_default=True, help="Loss range [0, C].")(f)
    f = click.option("--delta", type=float, default=0.05, show_default=True, help="Failure probability.")(f)
    f = click.option("--m", "m", type=int, required=True, help="Evaluating-sample size.")(f)
    return f


def _region_options(f):
    f = click.option("--alpha", type=float, default=0.05, show_default=True,
                     help="Clopper-Pearson level for an estimated region.")(f)
    f = click.option("--m-a", "m_a", type=int, default=None, help="Auxiliary membership-sample size.")(f)
    f = click.option("--hits", type=int, default=None, help="Auxiliary draws that fell in the region.")(f)
    f = click.option("--p-delta", "p_delta", type=float, default=None, help="Exact region mass.")(f)
    return f


@click.group(cls=_Group)
@click.version_option(package_name="pacverify")
def cli():
    """PAC bounds conditioned on verified zero-loss regions."""


@cli.command()
@_risk_options
@click.option("--M", "M", type=int, default=1, show_default=True, help="Hypothesis count (classic only).")
@click.option("--method", type=_method_choice, default="classic", show_default=True)
@_region_options
@click.option("--tol", type=float, default=None, help="Solver absolute tolerance.")
@click.option("--json", "as_json", is_flag=True, help="Machine-readable output.")
def bound(m, delta, C, r_hat, M, method, p_delta, hits, m_a, alpha, tol, as_json):
    """Bound on R - r_hat by the chosen method."""
    q = _query(m, delta, C, r_hat, M)
    method = Method.parse(method)
    rk = _knowledge(p_delta, hits, m_a, alpha)
    if rk is None:
        if method is not Method.CLASSIC:
            raise DomainError(f"method {method.value} needs --p-delta or --hits/--m-a")
        rk = RegionKnowledge.exact(0.0)
    if method is not Method.CLASSIC and q.M != 1:
        raise DomainError("conditioned methods assume M = 1")
    res = bound_from_knowledge(q, rk, method, _solver(tol))
    if as_json:
        _emit_json({"query": {"m": q.m, "delta": q.delta, "C": q.C, "r_hat": q.r_hat, "M": q.M},
                    **res.to_dict()})
        return
    d = res.diagnostics
    pairs = [("method", res.method.value), ("bound", res.bound), ("confidence", res.confidence),
             ("risk_upper", q.r_hat + res.bound), ("effective", d.effective),
             ("iterations", d.iterations), ("residual", d.residual), ("clamped", d.clamped)]
    pairs += [(k, v) for k, v in d.extra.items()]
    _emit_text(pairs)


@cli.command()
@_risk_options
@_region_options
@click.option("--target-delta", type=float, default=None,
              help="Also solve for the region mass reaching this failure probability.")
@click.option("--tol", type=float, default=None, help="Solver absolute tolerance.")
@click.option("--json", "as_json", is_flag=True)
def confidence(m, delta, C, r_hat, p_delta, hits, m_a, alpha, target_delta, tol, as_json):
    """Updated failure probability of the fixed Hoeffding bound given the region."""
    q = _query(m, delta, C, r_hat)
    rk = _knowledge(p_delta, hits, m_a, alpha) or RegionKnowledge.exact(0.0)
    out = {"bound": hoeffding_bound(q).bound, "delta": q.delta}
    if rk.is_estimate:
        p = clopper_pearson_lower(MembershipSample(rk.m_A, rk.hits), rk.alpha)
        new_delta = combined_confidence(updated_confidence(q, p), rk.alpha)
        out.update(p_L=p, alpha=rk.alpha)
    else:
        p = rk.p_delta
        new_delta = updated_confidence(q, p)
    out.update(p_delta=p, updated_delta=new_delta, confidence=1.0 - new_delta)
    if target_delta is not None:
        res = required_pdelta_for_confidence(target_delta, q, _solver(tol))
        out.update(target_delta=target_delta, required_p_delta=res.root, clamped=res.clamped)
    if as_json:
        _emit_json(out)
    else:
        _emit_text(list(out.items()))


@cli.command()
@click.option("--hits", type=int, required=True)
@click.option("--m-a", "m_a", type=int, required=True)
@click.option("--alpha", type=float, default=0.05, show_default=True)
@click.option("--delta", type=float, default=None, help="Bound failure probability to combine with alpha.")
@click.option("--json", "as_json", is_flag=True)
def estimate(hits, m_a, alpha, delta, as_json):
    """Point estimate and Clopper-Pearson lower limit for the region mass."""
    ms = MembershipSample(m_a, hits)
    out = {"m_A": m_a, "hits": hits, "alpha": alpha,
           "p_hat": estimate_pdelta(ms), "p_L": clopper_pearson_lower(ms, alpha)}
    if delta is not None:
        total = combined_confidence(delta, alpha)
        out.update(delta=delta, combined_failure=total, confidence=1.0 - total)
    if as_json:
        _emit_json(out)
    else:
        _emit_text(list(out.items()))


@cli.command()
@click.argument("table_id", type=click.Choice([t.value for t in TableId]))
@click.option("--m", "m", type=int, default=None, help="Default 100 (tables 1-2) or 1000 (table 3).")
@click.option("--delta", type=float, default=0.05, show_default=True)
@click.option("--r-hat", "r_hat", type=float, default=0.05, show_default=True)
@click.option("--C", "C", type=float, default=1.0, show_default=True)
@click.option("--decreases", default=None, help="Comma list, e.g. 10,20,30 or 0.1,0.2.")
@click.option("--tol", type=float, default=None, help="Solver absolute tolerance.")
@click.option("--json", "as_json", is_flag=True)
@click.option("--csv", "as_csv", is_flag=True)
def tables(table_id, m, delta, r_hat, C, decreases, tol, as_json, as_csv):
    """Recompute a published table beside the printed values."""
    kwargs = dict(table_id=table_id, m=m, delta=delta, r_hat=r_hat, C=C)
    if decreases:
        kwargs["decreases"] = parse_decreases(decreases)
    report = build_table(TableSpec(**kwargs), _solver(tol))
    if as_json:
        _emit_json(report.to_dict())
        return
    rows = report.to_dict()["rows"]
    keys = ["decrease", "computed", "published", "abs_diff", "verdict"]
    keys += [k for k in rows[0] if k not in keys] if rows else []
    if as_csv:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(keys)
        for r in rows:
            writer.writerow([repr(r[k]) if isinstance(r[k], float) else r[k] for k in keys])
        click.echo(buf.getvalue(), nl=False)
        return
    click.echo(f"{report.table_id.value}  " + "  ".join(f"{k}={v}" for k, v in report.params.items()))
    header = ["decrease"] + keys[1:]
    cells = [[format_decrease(r["decrease"])] + [_fmt(r[k]) for k in keys[1:]] for r in rows]
    widths = [max(len(h), *(len(c[i]) for c in cells)) for i, h in enumerate(header)]
    click.echo("  ".join(h.ljust(w) for h, w in zip(header, widths)))
    for c in cells:
        click.echo("  ".join(v.ljust(w) for v, w in zip(c, widths)))
    flagged = [format_decrease(r["decrease"]) for r in rows if r["verdict"] == "FLAG"]
    if flagged:
        click.echo(f"discrepant rows: {', '.join(flagged)}")


@cli.command()
@click.argument("scenario", type=click.Path(dir_okay=False))
@click.option("--m", "m", type=int, required=True)
@click.option("--delta", type=float, default=0.05, show_default=True)
@click.option("--method", type=_method_choice, default="classic", show_default=True)
@click.option("--trials", type=int, default=10_000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--mode", type=click.Choice(["auto", "exact", "monte-carlo"]), default="auto", show_default=True)
@click.option("--s", "s", type=float, default=None, help="Exact mode: also decompose P(R > r_hat + s) by k.")
@click.option("--json", "as_json", is_flag=True)
def validate(scenario, m, delta, method, trials, seed, mode, s, as_json):
    """Check a bound's guarantee on a discrete scenario file."""
    sc = load_scenario(scenario)
    method = Method.parse(method)
    if m < 1:
        raise DomainError(f"m must be >= 1 (got {m})")
    if mode == "auto":
        size = math.comb(m + len(sc.points) - 1, m)
        mode = "exact" if m <= EXACT_MAX_M and size <= ENUMERATION_BUDGET else "monte-carlo"
    p = region_mass(sc)

    if mode == "monte-carlo":
        rep = monte_carlo_coverage(sc, m, delta, method, trials, seed)
        out = {"mode": mode, **rep.to_dict(), "threshold": rep.threshold(),
               "verdict": "PASS" if rep.passes() else "FAIL"}
    else:
        fail = exact_bound_failure_probability(sc, m, method_bound_function(sc, m, delta, method))
        out = {"mode": mode, "method": method.value, "m": m, "delta": delta, "p_delta": p,
               "true_risk": true_risk(sc), "failure_probability": fail,
               "verdict": "PASS" if fail <= delta else "FAIL"}
        if s is not None:
            ex = exact_failure_probability(sc, m, s)
            out["s"] = s
            out["failure_at_s"] = ex.unconditional
            out["per_k"] = [{"k": pk.k, "event_prob": pk.event_prob, "fail_given": pk.fail_given,
                             "scaled_fail_given": pk.scaled_fail_given} for pk in ex.per_k]
    if as_json:
        _emit_json(out)
        return
    per_k = out.pop("per_k", None)
    _emit_text(list(out.items()))
    if per_k:
        click.echo("k  event_prob  fail_given  scaled_fail_given")
        for row in per_k:
            click.echo(f"{row['k']}  {_fmt(row['event_prob'])}  {_fmt(row['fail_given'])}  "
                       f"{_fmt(row['scaled_fail_given'])}")


def main(argv=None) -> int:
    try:
        cli.main(args=argv, prog_name="pacverify", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.ClickException as exc:
        exc.show()
        return exc.exit_code
    except click.exceptions.Abort:
        click.echo("Aborted!", err=True)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
