"""Command-line interface over `.scm` model files.

Every command reads a model file, honors the global ``--format`` and
``--budget`` options, and exits 0 on success, 1 on domain or validation
errors and 2 on I/O or parse errors.  JSON output is deterministic: keys
are sorted, rationals are rendered in lowest terms, floats carry 12
significant digits.
"""

from __future__ import annotations

import json
import sys
from fractions import Fraction

import click

from .causal import (
    InterventionProtocol,
    causal_entropy,
    interventional_entropies,
    observational_protocol,
    rank_features,
    uniform_protocol,
)
from .core import Distribution, Scm, intervene, validate
from .dsl import parse
from .errors import DslError, ModelValidationError, ProtocolError, ScmError
from .inference import (
    EnumerationBudget,
    conditional,
    entailed_joint,
    has_total_effect,
    marginal,
)
from .information import conditional_entropy, entropy, mutual_information
from .sampling import empirical_distribution, forward_sample, write_csv

SCHEMA_VERSION = 1


@click.group()
@click.option("--format", "fmt", type=click.Choice(["table", "json"]), default="table",
              show_default=True, help="Output format.")
@click.option("--budget", type=int, default=None, envvar="SCMKIT_BUDGET",
              help="Cap on exactly enumerated noise configurations "
                   "(default 2^24; env var SCMKIT_BUDGET).")
@click.pass_context
def cli(ctx, fmt: str, budget: int | None):
    """Exact analysis of discrete structural causal models."""
    ctx.ensure_object(dict)
    ctx.obj["format"] = fmt
    if budget is not None and budget < 1:
        raise click.BadParameter("must be at least 1", param_hint="--budget")
    ctx.obj["budget"] = EnumerationBudget(budget) if budget is not None else None


def _fail(message: str, code: int):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _load(path: str) -> Scm:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        _fail(str(exc), 2)
    try:
        return parse(text)
    except ModelValidationError as exc:
        for violation in exc.violations:
            where = f"{path}:{violation.line}: " if violation.line else f"{path}: "
            click.echo(f"error: {where}{violation.message}", err=True)
        sys.exit(1)
    except DslError as exc:
        _fail(f"{path}:{exc}", 2)


def _guard(fn):
    """Run a command body, mapping domain errors to exit code 1."""
    try:
        fn()
    except (ScmError, ValueError) as exc:
        _fail(str(exc), 1)


def _float12(x: float) -> float:
    return float(format(x, ".12g"))


def _rat(value: Fraction) -> str:
    return str(value)  # Fraction renders p/q in lowest terms, or just p


def _emit_json(command: str, arguments: dict, results: dict, diagnostics: list[str] = ()):
    doc = {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "arguments": arguments,
        "results": results,
        "diagnostics": list(diagnostics),
    }
    click.echo(json.dumps(doc, sort_keys=True, indent=2))


def _parse_bindings(pairs: tuple[str, ...], what: str) -> dict[str, int]:
    out: dict[str, int] = {}
    for raw in pairs:
        name, sep, value = raw.partition("=")
        if not sep or not name:
            _fail(f"{what} must look like VAR=VALUE, got {raw!r}", 1)
        try:
            parsed = int(value)
        except ValueError:
            _fail(f"{what} value for {name!r} must be an integer, got {value!r}", 1)
        if name in out:
            _fail(f"{what} names {name!r} twice", 1)
        out[name] = parsed
    return out


def _resolve_protocol(scm: Scm, var: str, spec: str, budget) -> InterventionProtocol:
    if spec == "uniform":
        return uniform_protocol(scm, var)
    if spec == "obs":
        return observational_protocol(scm, var, budget)
    if spec.startswith("@"):
        return _protocol_from_file(scm, var, spec[1:])
    raise ProtocolError(f"unknown protocol {spec!r}; use uniform, obs or @FILE")


def _protocol_from_file(scm: Scm, var: str, path: str) -> InterventionProtocol:
    decl = scm.variable(var)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        _fail(str(exc), 2)
    masses: dict[int, Fraction] = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        value_text, sep, mass_text = line.partition(":")
        if not sep:
            raise ProtocolError(f"{path}:{lineno}: expected VALUE:MASS, got {line!r}")
        try:
            value = int(value_text.strip())
            mass = Fraction(mass_text.strip())
        except (ValueError, ZeroDivisionError):
            raise ProtocolError(f"{path}:{lineno}: bad VALUE:MASS entry {line!r}") from None
        if value in masses:
            raise ProtocolError(f"{path}:{lineno}: value {value} listed twice")
        masses[value] = mass
    if set(masses) != set(decl.values):
        raise ProtocolError(
            f"protocol values {sorted(masses)} must equal the range {sorted(decl.values)} of {var!r}")
    try:
        dist = Distribution(decl.values, tuple(masses[v] for v in decl.values))
    except ValueError as exc:
        raise ProtocolError(f"{path}: {exc}") from None
    return InterventionProtocol(var, dist)


# ---------------------------------------------------------------------------
# Commands

@cli.command("validate")
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.pass_context
def cmd_validate(ctx, file: str):
    """Check a model file; exit 0 only if it is structurally valid."""
    try:
        with open(file, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        _fail(str(exc), 2)
    try:
        scm = parse(text)
    except ModelValidationError as exc:
        if ctx.obj["format"] == "json":
            _emit_json("validate", {"file": file}, {
                "valid": False,
                "violations": [{"code": v.code, "message": v.message, "line": v.line}
                               for v in exc.violations],
            })
        else:
            for v in exc.violations:
                where = f"{file}:{v.line}: " if v.line else f"{file}: "
                click.echo(f"{where}{v.message}", err=True)
        sys.exit(1)
    except DslError as exc:
        _fail(f"{file}:{exc}", 2)
    report = validate(scm)
    if ctx.obj["format"] == "json":
        _emit_json("validate", {"file": file},
                   {"valid": report.ok, "violations": report.messages()})
    else:
        click.echo(f"{file}: ok ({len(scm.variables)} variables, {len(scm.noises)} noises)")


@cli.command("dist")
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--target", required=True, help="Variable whose distribution to print.")
@click.option("--do", "do_pairs", multiple=True, metavar="VAR=VAL",
              help="Atomic intervention, applied before conditioning (repeatable).")
@click.option("--given", "given_pairs", multiple=True, metavar="VAR=VAL",
              help="Conditioning evidence (repeatable).")
@click.pass_context
def cmd_dist(ctx, file: str, target: str, do_pairs, given_pairs):
    """Exact marginal of a variable, optionally under do() and conditioning."""
    scm = _load(file)
    budget = ctx.obj["budget"]
    do = _parse_bindings(do_pairs, "--do")
    given = _parse_bindings(given_pairs, "--given")
    overlap = sorted(set(do) & set(given))
    if overlap:
        _fail(f"cannot both intervene and condition on {', '.join(overlap)}", 1)

    def run():
        model = scm
        for name, value in do.items():
            model = intervene(model, name, value)
        joint = entailed_joint(model, budget)
        if given:
            dist = conditional(joint, target, given)
        else:
            dist = marginal(joint, target)
        if ctx.obj["format"] == "json":
            _emit_json("dist", {"file": file, "target": target, "do": do, "given": given}, {
                "target": target,
                "distribution": {str(v): _rat(m) for v, m in dist.items()},
                "approx": {str(v): _float12(float(m)) for v, m in dist.items()},
            })
        else:
            qualifier = "".join(
                [f" | do({', '.join(f'{k}={v}' for k, v in do.items())})" if do else "",
                 f" | {', '.join(f'{k}={v}' for k, v in given.items())}" if given else ""])
            click.echo(f"distribution of {target}{qualifier}")
            width = max(len(str(v)) for v in dist.support)
            rat_width = max(len(_rat(m)) for m in dist.masses)
            for value, mass in dist.items():
                click.echo(f"  {value:>{width}}  {_rat(mass):<{rat_width}}  {float(mass):.6f}")

    _guard(run)


@cli.command("info")
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--target", required=True, help="Outcome variable.")
@click.option("--given", default=None, metavar="VAR",
              help="Report the conditional entropy H(target | VAR).")
@click.option("--mi", default=None, metavar="VAR",
              help="Report the mutual information I(target ; VAR).")
@click.pass_context
def cmd_info(ctx, file: str, target: str, given: str | None, mi: str | None):
    """Entropy, conditional entropy or mutual information, in bits."""
    if given and mi:
        _fail("--given and --mi are mutually exclusive", 1)
    scm = _load(file)
    budget = ctx.obj["budget"]

    def run():
        joint = entailed_joint(scm, budget)
        if mi:
            label = f"I({target} ; {mi})"
            quantity = "mutual_information"
            value = mutual_information(joint, target, mi)
        elif given:
            label = f"H({target} | {given})"
            quantity = "conditional_entropy"
            value = conditional_entropy(joint, target, given)
        else:
            label = f"H({target})"
            quantity = "entropy"
            value = entropy(marginal(joint, target))
        if ctx.obj["format"] == "json":
            _emit_json("info", {"file": file, "target": target, "given": given, "mi": mi},
                       {"quantity": quantity, "bits": _float12(value)})
        else:
            click.echo(f"{label} = {value:.4f} bit")

    _guard(run)


@cli.command("causal")
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--target", required=True, help="Outcome variable.")
@click.option("--do-var", required=True, help="Variable to intervene on.")
@click.option("--protocol", default="uniform", show_default=True, metavar="uniform|obs|@FILE",
              help="Distribution over intervention values.")
@click.option("--allow-nonintervenable", is_flag=True,
              help="Evaluate even if the variable is marked non-intervenable.")
@click.pass_context
def cmd_causal(ctx, file: str, target: str, do_var: str, protocol: str,
               allow_nonintervenable: bool):
    """Causal entropy and causal information gain of a target for one variable."""
    scm = _load(file)
    budget = ctx.obj["budget"]

    def run():
        proto = _resolve_protocol(scm, do_var, protocol, budget)
        prior = entropy(marginal(entailed_joint(scm, budget), target))
        hc = causal_entropy(scm, target, proto, budget,
                            allow_nonintervenable=allow_nonintervenable)
        gain = prior - hc
        effect = has_total_effect(scm, do_var, target, budget)
        per_value = interventional_entropies(scm, do_var, target, budget)
        if ctx.obj["format"] == "json":
            _emit_json("causal", {
                "file": file, "target": target, "do_var": do_var, "protocol": protocol,
                "allow_nonintervenable": allow_nonintervenable,
            }, {
                "target_entropy_bits": _float12(prior),
                "causal_entropy_bits": _float12(hc),
                "causal_information_gain_bits": _float12(gain),
                "has_total_effect": effect,
                "per_value_entropies_bits": {str(v): _float12(h) for v, h in per_value},
            })
        else:
            name = f"do({do_var} ~ {protocol})"
            click.echo(f"H({target}) = {prior:.4f} bit")
            click.echo(f"Hc({target} | {name}) = {hc:.4f} bit")
            click.echo(f"Ic({target} | {name}) = {gain:.4f} bit")
            click.echo(f"total effect of {do_var} on {target}: {'yes' if effect else 'no'}")
            for value, h in per_value:
                click.echo(f"H({target} | do({do_var}={value})) = {h:.4f} bit")

    _guard(run)


@cli.command("rank")
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--target", required=True, help="Outcome variable to control.")
@click.option("--candidates", default=None, metavar="A,B,...",
              help="Candidate variables (default: all intervenable except the target).")
@click.option("--metric", type=click.Choice(["cig", "mi", "both"]), default="cig",
              show_default=True, help="Ranking metric: causal information gain, "
                                      "mutual information, or the contrast of both.")
@click.option("--protocol", default="uniform", show_default=True, metavar="uniform|obs|@FILE",
              help="Intervention protocol used for every candidate.")
@click.pass_context
def cmd_rank(ctx, file: str, target: str, candidates: str | None, metric: str, protocol: str):
    """Rank candidate variables by how much control they give over the target."""
    scm = _load(file)
    budget = ctx.obj["budget"]

    def run():
        if candidates is None:
            names = [v.name for v in scm.variables
                     if v.name != target and v.name not in scm.non_intervenable]
        else:
            names = [c.strip() for c in candidates.split(",") if c.strip()]
        if protocol in ("uniform", "obs"):
            kind = "observational" if protocol == "obs" else "uniform"
            report = rank_features(scm, target, names, kind, budget)
        elif protocol.startswith("@"):
            if len(names) != 1:
                raise ProtocolError("@FILE protocols apply to a single candidate only")
            explicit = {names[0]: _protocol_from_file(scm, names[0], protocol[1:])}
            report = rank_features(scm, target, names, explicit, budget)
        else:
            raise ProtocolError(f"unknown protocol {protocol!r}; use uniform, obs or @FILE")

        by_metric = {
            "cig": report.ranking(),
            "mi": report.mi_ranking,
            "both": report.ranking(),
        }[metric]
        if ctx.obj["format"] == "json":
            _emit_json("rank", {
                "file": file, "target": target, "candidates": names,
                "metric": metric, "protocol": protocol,
            }, {
                "ranking": list(by_metric),
                "cig_ranking": list(report.ranking()),
                "mi_ranking": list(report.mi_ranking),
                "records": [{
                    "candidate": r.candidate,
                    "causal_entropy_bits": _float12(r.causal_entropy),
                    "causal_information_gain_bits": _float12(r.causal_information_gain),
                    "mutual_information_bits": _float12(r.mutual_information),
                    "has_total_effect": r.has_total_effect,
                } for r in report.records],
            })
        else:
            records = {r.candidate: r for r in report.records}
            width = max(len("variable"), max(len(c) for c in by_metric))
            header = f"  #  {'variable':<{width}}"
            if metric in ("cig", "both"):
                header += "  Ic [bit]"
            if metric in ("mi", "both"):
                header += "   I [bit]"
            header += "  effect"
            click.echo(f"control over {target} (protocol: {protocol})")
            click.echo(header)
            for pos, name in enumerate(by_metric, start=1):
                r = records[name]
                line = f"  {pos}  {name:<{width}}"
                if metric in ("cig", "both"):
                    line += f"  {r.causal_information_gain:>8.4f}"
                if metric in ("mi", "both"):
                    line += f"  {r.mutual_information:>8.4f}"
                line += f"  {'yes' if r.has_total_effect else 'no'}"
                click.echo(line)
            if metric == "both":
                click.echo("causal-gain order: " + " > ".join(report.ranking()))
                click.echo("mutual-information order: " + " > ".join(report.mi_ranking))

    _guard(run)


@cli.command("sample")
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("-n", "--rows", "n", type=int, required=True, help="Number of rows to draw.")
@click.option("--seed", type=int, default=0, show_default=True, help="Sampler seed.")
@click.option("--do", "do_pair", default=None, metavar="VAR=VAL",
              help="Apply an atomic intervention before sampling.")
@click.option("--csv", "csv_path", type=click.Path(dir_okay=False, writable=True),
              default=None, help="Write rows to a CSV file instead of a summary.")
@click.pass_context
def cmd_sample(ctx, file: str, n: int, seed: int, do_pair: str | None, csv_path: str | None):
    """Forward-sample the model with a reproducible seeded generator."""
    scm = _load(file)

    def run():
        do = None
        if do_pair is not None:
            bindings = _parse_bindings((do_pair,), "--do")
            do = next(iter(bindings.items()))
        batch = forward_sample(scm, n, seed, do=do)
        if csv_path:
            write_csv(batch, csv_path)
        empirical = {var: empirical_distribution(batch, var) for var in batch.variables}
        if ctx.obj["format"] == "json":
            _emit_json("sample", {
                "file": file, "n": n, "seed": seed,
                "do": {do[0]: do[1]} if do else {}, "csv": csv_path,
            }, {
                "n": n,
                "seed": seed,
                "empirical": {var: {str(v): _float12(f) for v, f in dist.items()}
                              for var, dist in empirical.items()},
            })
        elif csv_path:
            click.echo(f"wrote {n} rows to {csv_path}")
        else:
            suffix = f" under do({do[0]}={do[1]})" if do else ""
            click.echo(f"sampled {n} rows (seed {seed}){suffix}")
            for var in batch.variables:
                cells = "  ".join(f"{v}: {f:.4f}" for v, f in sorted(empirical[var].items()))
                click.echo(f"  {var}: {cells}")

    _guard(run)


def main():
    """Console-script entry point."""
    cli(prog_name="scmkit")


if __name__ == "__main__":
    main()
