from __future__ import annotations

import csv
import io

import pytest

from cutbench.bench import (
    CSV_HEADER,
    ExperimentConfig,
    derive_seed,
    load_config,
    run_experiment,
    with_overrides,
)


def _ghz(**kw):
    base = dict(experiment="ghz", budgets=(700, 1400), reps=3, seed=11)
    base.update(kw)
    return ExperimentConfig(**base)


def _rows(text):
    return list(csv.reader(io.StringIO(text)))


def test_ghz_rows_and_summary():
    result = run_experiment(_ghz())
    rows = _rows(result.to_csv())
    assert tuple(rows[0]) == CSV_HEADER
    # 3 methods x 2 budgets x 3 reps, plus mean and sem per cell
    assert len(rows) - 1 == 18 + 12
    mean = result.summary_value("clifford", 700, "hellinger_mean")
    hs = [r.metrics["hellinger"] for r in result.cell("clifford", 700)]
    assert mean == pytest.approx(sum(hs) / 3)
    assert all(0.0 <= h <= 1.0 for h in hs)


def test_same_circuit_across_methods():
    result = run_experiment(_ghz(reps=2))
    for rep in range(2):
        seeds = {r.diagnostics["circuit_seed"] for r in result.records if r.rep == rep}
        assert len(seeds) == 1


def test_csv_byte_identical():
    assert run_experiment(_ghz()).to_csv() == run_experiment(_ghz()).to_csv()
    assert run_experiment(_ghz()).to_csv() != run_experiment(_ghz(seed=12)).to_csv()


def test_workers_match_serial():
    assert run_experiment(_ghz(workers=2)).to_csv() == run_experiment(_ghz()).to_csv()


def test_write_csv(tmp_path):
    out = tmp_path / "ghz.csv"
    result = run_experiment(_ghz(reps=2, out=str(out), methods=("pauli",)))
    assert out.read_text() == result.to_csv()


def test_qaoa_rank_fractions():
    cfg = ExperimentConfig(
        experiment="qaoa", budgets=(300,), reps=4, cut_reps=2, seed=5, spsa={"max_iter": 3}
    )
    result = run_experiment(cfg)
    assert [r.method for r in result.records].count("uncut") == 4
    assert [r.method for r in result.records].count("clifford_cut") == 2
    for method in cfg.methods:
        fracs = [result.summary_value(method, 300, f"frac_{k}") for k in ("best", "second", "third", "wrong")]
        assert sum(fracs) == pytest.approx(1.0)


def test_default_reps():
    ideal = ExperimentConfig(experiment="qaoa")
    noisy = ExperimentConfig(experiment="qaoa", noise="brisbane-like")
    assert (ideal.reps_for("uncut"), ideal.reps_for("clifford_cut")) == (120, 60)
    assert (noisy.reps_for("uncut"), noisy.reps_for("pauli_cut")) == (20, 10)
    assert ExperimentConfig(experiment="ghz").reps_for("pauli") == 60
    assert ExperimentConfig(experiment="ghz").budgets == (1000, 10000, 100000)


@pytest.mark.parametrize(
    "kw",
    [
        dict(experiment="bogus"),
        dict(experiment="ghz", methods=("uncut",)),
        dict(experiment="ghz", budgets=(0,)),
        dict(experiment="ghz", reps=0),
        dict(experiment="ghz", noise="mystery"),
        dict(experiment="qaoa", graphs=("Z",)),
        dict(experiment="qaoa", spsa={"a": -1.0}),
    ],
)
def test_config_validation(kw):
    with pytest.raises(ValueError):
        ExperimentConfig(**kw)


def test_load_config(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text(
        "# small noisy run\nexperiment = qaoa\ngraph = B,C\nbudgets = 2000, 4000\n"
        "noise = brisbane-like\nspsa_max_iter = 5\ndevice-limit = none\n"
    )
    values = load_config(path)
    assert values == {
        "experiment": "qaoa",
        "graphs": ("B", "C"),
        "budgets": (2000, 4000),
        "noise": "brisbane-like",
        "spsa": {"max_iter": 5},
        "device_limit": None,
    }
    cfg = with_overrides(ExperimentConfig(**values), seed=9, reps=None)
    assert cfg.seed == 9 and cfg.reps is None
    path.write_text("colour = blue\n")
    with pytest.raises(ValueError, match="unknown key"):
        load_config(path)


def test_derive_seed_is_stable():
    assert derive_seed(1, 2, 3) == derive_seed(1, 2, 3)
    assert derive_seed(1, 2, 3) != derive_seed(1, 3, 2)
