"""Command-line front end: `driftshap attribute | generate | bench`.

Exit codes: 2 config/usage error, 3 data ingestion error, 4 schema mismatch,
5 estimator precondition failure. The DRIFTSHAP_OUT_DIR environment variable
sets the default output directory.
"""
from __future__ import annotations

import json
import os
import sys

import click

from .bench import (
    SYNTHETIC_FAMILIES,
    run_synthetic_suite,
    run_toy_suite,
    write_suite_outputs,
)
from .errors import (
    ConfigError,
    EmptyDataError,
    EnumerationOverflowError,
    InvalidConceptError,
    NonNumericError,
    OutOfRangeError,
    PerturbCategoricalError,
    PlanMismatchError,
    SchemaMismatchError,
    TooManyPlayersError,
    UnknownCategoryError,
)
from .generators import (
    SEA_THRESHOLDS,
    DriftScenario,
    GeneratorSpec,
    Perturbation,
    apply_scenario,
    scenario_manifest,
)
from .pipeline import RunConfig, run_attribute

EXIT_CONFIG = 2
EXIT_INGEST = 3
EXIT_SCHEMA = 4
EXIT_ESTIMATOR = 5

_ERROR_CODES = (
    ((ConfigError, InvalidConceptError, PerturbCategoricalError, ValueError),
     EXIT_CONFIG),
    ((EmptyDataError, NonNumericError, UnknownCategoryError, OutOfRangeError,
      FileNotFoundError), EXIT_INGEST),
    ((SchemaMismatchError,), EXIT_SCHEMA),
    ((TooManyPlayersError, EnumerationOverflowError, PlanMismatchError),
     EXIT_ESTIMATOR),
)


def _fail(exc) -> "None":
    for types, code in _ERROR_CODES:
        if isinstance(exc, types):
            click.echo(f"error: {exc}", err=True)
            sys.exit(code)
    raise exc


def _out_dir(explicit) -> str:
    return explicit or os.environ.get("DRIFTSHAP_OUT_DIR", ".")


@click.group()
@click.version_option()
def main():
    """Attribute changes in model risk to real and virtual drift."""


@main.command()
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="JSON or TOML run configuration; flags override it.")
@click.option("--baseline", type=click.Path(), default=None)
@click.option("--target", type=click.Path(), default=None)
@click.option("--label", default=None)
@click.option("--schema", "schema_path", type=click.Path(), default=None,
              help="Schema JSON file; inferred from the baseline when absent.")
@click.option("--hypothesis", default=None,
              help='e.g. "tree:3", "rule:x1 and x2", "map:path.json"')
@click.option("--loss", default=None, help='"misclassification" or "cost-matrix:path"')
@click.option("--factorization", type=click.Choice(["two-player", "per-feature"]),
              default=None)
@click.option("--estimator", default=None,
              help='"auto", "exact", or "monte-carlo:N_PERMS,SEED"')
@click.option("--smoothing", type=float, default=None)
@click.option("--bins", type=int, default=None)
@click.option("--bin-strategy", type=click.Choice(["equal-width", "quantile"]),
              default=None)
@click.option("--output", type=click.Path(), default=None)
def attribute(config_path, baseline, target, label, schema_path, hypothesis,
              loss, factorization, estimator, smoothing, bins, bin_strategy,
              output):
    """Run the attribution pipeline over two CSV populations."""
    try:
        doc = _load_config(config_path) if config_path else {}
        if baseline:
            doc["baseline_path"] = baseline
        if target:
            doc["target_path"] = target
        if label:
            doc["label"] = label
        if schema_path:
            with open(schema_path, encoding="utf-8") as fh:
                doc["schema"] = json.load(fh)
        if hypothesis:
            doc["hypothesis"] = _parse_hypothesis_flag(hypothesis)
        if loss:
            doc["loss"] = _parse_loss_flag(loss)
        if factorization:
            doc["factorization"] = factorization
        if estimator:
            doc["estimator"] = _parse_estimator_flag(estimator)
        if smoothing is not None:
            doc["smoothing"] = smoothing
        if bins is not None:
            doc["bin_count"] = bins
        if bin_strategy:
            doc["bin_strategy"] = bin_strategy
        if output:
            doc["output"] = output
        if not doc.get("baseline_path") or not doc.get("target_path"):
            raise ConfigError("baseline and target paths are required")
        cfg = RunConfig.from_dict(doc)
        report = run_attribute(cfg)
    except Exception as exc:  # noqa: BLE001 - mapped to exit codes
        _fail(exc)
    click.echo(report.render_text(), nl=False)
    if cfg.output:
        click.echo(f"report written to {cfg.output}")


def _load_config(path) -> dict:
    with open(path, "rb") as fh:
        blob = fh.read()
    if str(path).endswith(".toml"):
        try:
            import tomllib
        except ImportError:  # Python < 3.11
            import tomli as tomllib
        try:
            return tomllib.loads(blob.decode("utf-8"))
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}")
    try:
        return json.loads(blob)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: {exc}")


def _parse_hypothesis_flag(text: str) -> dict:
    kind, _, rest = text.partition(":")
    if kind == "tree":
        return {"kind": "tree", "max_depth": int(rest) if rest else 3}
    if kind == "rule":
        if not rest:
            raise ConfigError("rule hypothesis needs an expression")
        return {"kind": "rule", "expression": rest}
    if kind == "map":
        if not rest:
            raise ConfigError("map hypothesis needs a path")
        return {"kind": "map", "path": rest}
    raise ConfigError(f"unknown hypothesis flag {text!r}")


def _parse_loss_flag(text: str) -> dict:
    if text == "misclassification":
        return {"kind": "misclassification"}
    kind, _, rest = text.partition(":")
    if kind == "cost-matrix" and rest:
        return {"kind": "cost-matrix", "path": rest}
    raise ConfigError(f"unknown loss flag {text!r}")


def _parse_estimator_flag(text: str) -> dict:
    if text in ("auto", "exact"):
        return {"kind": text}
    kind, _, rest = text.partition(":")
    if kind == "monte-carlo":
        parts = [p for p in rest.split(",") if p]
        est = {"kind": "monte-carlo"}
        if parts:
            est["n_permutations"] = int(parts[0])
        if len(parts) > 1:
            est["seed"] = int(parts[1])
        return est
    raise ConfigError(f"unknown estimator flag {text!r}")


def _parse_concept(family: str, token: str) -> int:
    token = token.strip()
    if family == "sea":
        try:
            theta = float(token)
        except ValueError:
            raise ConfigError(f"bad concept {token!r}")
        for cid, t in SEA_THRESHOLDS.items():
            if t == theta:
                return cid
        if theta == int(theta) and int(theta) in SEA_THRESHOLDS:
            return int(theta)
        raise InvalidConceptError(f"sea: no concept with threshold {theta}")
    try:
        return int(token)
    except ValueError:
        raise ConfigError(f"bad concept {token!r}")


@main.command()
@click.option("--family", type=click.Choice(["stagger", "sea", "sine", "circle",
                                             "rbf"]), required=True)
@click.option("--concepts", required=True,
              help="Baseline,target concept ids (SEA also accepts thresholds, e.g. 8,9).")
@click.option("--rows", type=int, default=10000)
@click.option("--seed", type=int, default=0)
@click.option("--noise", type=float, default=0.0)
@click.option("--features", type=int, default=10, help="RBF feature count.")
@click.option("--perturb", default=None, help="Feature to perturb in the target.")
@click.option("--mult", default=None, help="Uniform multiplier range LOW,HIGH.")
@click.option("--skew", default=None, help="Category to overweight (categorical).")
@click.option("--boost", type=float, default=3.0)
@click.option("--out", "out_dir", type=click.Path(), default=None)
def generate(family, concepts, rows, seed, noise, features, perturb, mult,
             skew, boost, out_dir):
    """Generate a baseline/target CSV pair plus a scenario manifest."""
    try:
        tokens = concepts.split(",")
        if len(tokens) != 2:
            raise ConfigError("--concepts needs exactly two comma-separated values")
        c1 = _parse_concept(family, tokens[0])
        c2 = _parse_concept(family, tokens[1])
        base = GeneratorSpec(family, c1, rows, seed=seed, noise_rate=noise,
                             n_features=features)
        targ = GeneratorSpec(family, c2, rows, seed=seed + 1000, noise_rate=noise,
                             n_features=features)
        perturbation = None
        if perturb:
            if mult:
                low, high = (float(v) for v in mult.split(","))
                perturbation = Perturbation("uniform-multiplier", perturb,
                                            low=low, high=high, seed=seed + 2000)
            else:
                perturbation = Perturbation("category-skew", perturb,
                                            category=skew or "", boost=boost,
                                            seed=seed + 2000)
        scn = DriftScenario(base, targ, perturbation)
        base_raw, targ_raw = apply_scenario(scn)
        out = _out_dir(out_dir)
        os.makedirs(out, exist_ok=True)
        base_path = os.path.join(out, "baseline.csv")
        targ_path = os.path.join(out, "target.csv")
        base_raw.to_csv(base_path)
        targ_raw.to_csv(targ_path)
        manifest_path = os.path.join(out, "manifest.json")
        with open(manifest_path, "w", encoding="utf-8") as fh:
            json.dump(scenario_manifest(scn), fh, sort_keys=True, indent=2)
            fh.write("\n")
    except Exception as exc:  # noqa: BLE001
        _fail(exc)
    click.echo(f"wrote {base_path}, {targ_path}, {manifest_path}")


@main.command()
@click.option("--suite", type=click.Choice(["toy", "synthetic"]), required=True)
@click.option("--family", type=click.Choice(list(SYNTHETIC_FAMILIES)), default=None)
@click.option("--scenario", type=click.Choice(["concept-change", "feature-perturb"]),
              default=None)
@click.option("--feature", default=None)
@click.option("--seeds", type=int, default=3, help="Number of seeds (0..N-1).")
@click.option("--rows", type=int, default=8000)
@click.option("--depth", type=int, default=None)
@click.option("--out", "out_dir", type=click.Path(), default=None)
def bench(suite, family, scenario, feature, seeds, rows, depth, out_dir):
    """Run the built-in toy or synthetic evaluation suites."""
    out = _out_dir(out_dir)
    try:
        if suite == "toy":
            results = run_toy_suite()
        else:
            families = [family] if family else list(SYNTHETIC_FAMILIES)
            scenarios = [scenario] if scenario else ["concept-change",
                                                     "feature-perturb"]
            results = []
            for fam in families:
                for scn in scenarios:
                    results.extend(run_synthetic_suite(
                        fam, scn, range(seeds), rows=rows, feature=feature,
                        depth=depth))
        paths = write_suite_outputs(results, out, suite)
    except Exception as exc:  # noqa: BLE001
        _fail(exc)
    with open(paths["table"], encoding="utf-8") as fh:
        click.echo(fh.read(), nl=False)
    if suite == "toy" and not all(r["passed"] for r in results):
        sys.exit(1)


if __name__ == "__main__":
    main()
