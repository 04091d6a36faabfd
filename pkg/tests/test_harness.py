import json
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest

from nmcode.errors import FormatError, RegimeTooLarge, SpaceMismatch
from nmcode.harness import BOTTOM, DistributionTable, ExperimentConfig, run, run_hybrid_replay, stat_distance
from nmcode.harness import adversaries
from nmcode.harness.cli import main
from nmcode.harness.stats import distance_margin, hoeffding_halfwidth, message_space
from nmcode.pipeline import PipelineParams


def table(**counts):
    return DistributionTable(Counter({k.lstrip("_"): v for k, v in counts.items()}))


def test_stat_distance_examples():
    assert stat_distance(table(_0=3, _1=1), table(_0=6, _1=2)) == 0
    assert stat_distance(table(_0=1), table(_1=5)) == 1
    assert stat_distance(table(_0=1, _1=1), table(_0=1)) == Fraction(1, 2)


def test_stat_distance_space_mismatch():
    a = DistributionTable(Counter({"0": 1}), space=message_space(1))
    b = DistributionTable(Counter({"00": 1}), space=message_space(2))
    with pytest.raises(SpaceMismatch):
        stat_distance(a, b)
    with pytest.raises(SpaceMismatch):
        a.add("11")
    a.add(None)
    assert a.counts[BOTTOM] == 1


def test_margins():
    assert hoeffding_halfwidth(10_000) == pytest.approx(0.01358, abs=1e-5)
    assert distance_margin(17, 500, 500) == pytest.approx(0.249, abs=1e-3)
    assert distance_margin(5, 10_000, 10_000) == pytest.approx(0.038, abs=1e-3)
    assert distance_margin(17, 65536) == pytest.approx(0.0106, abs=1e-4)


@pytest.mark.parametrize("obj, fragment", [
    ({"params": {}}, "target"),
    ({"target": "tamper"}, "config.target"),
    ({"target": "switching", "mode": "fast"}, "config.mode"),
    ({"target": "switching", "trials": 0}, "config.trials"),
    ({"target": "switching", "colour": 1}, "unknown fields"),
])
def test_config_validation(obj, fragment):
    with pytest.raises(FormatError, match=fragment):
        ExperimentConfig.from_json(obj)


def test_config_file_errors(tmp_path):
    path = tmp_path / "c.json"
    path.write_text("{")
    with pytest.raises(FormatError):
        ExperimentConfig.load(path)


def test_constant_circuits_never_fail():
    cfg = ExperimentConfig("switching", {"w": 2, "t": 1, "p_log_inv": 1, "sigma": 2, "source": "both",
                                         "circuits": {"n": 6, "dnfs": [[], [[1], [-1]]]}}, trials=500)
    rep = run(cfg)
    assert rep["ok"]
    for src in ("sigma-wise", "uniform"):
        assert rep["results"][src]["failures"] == 0


def test_exhaustive_budget_refusals():
    sw = ExperimentConfig("switching", {"w": 2, "t": 2, "p_log_inv": 1, "source": "uniform",
                                        "circuits": {"n": 6, "dnfs": [[[1, 2]]]}}, mode="exhaustive")
    with pytest.raises(RegimeTooLarge):
        run(sw)
    star = ExperimentConfig("star-reduction", {"k": 2, "n": 40, "p_log_inv": 1, "sigma": 1, "enforce": False},
                            mode="exhaustive", adversary="identity")
    with pytest.raises(RegimeTooLarge):
        run(star)
    ss = ExperimentConfig("ss-reduction", {"k": 1, "sigma": 4, "m": 1, "q": 1, "ell": 2}, mode="exhaustive")
    with pytest.raises(RegimeTooLarge):
        run(ss)


def test_switching_exhaustive_small():
    cfg = ExperimentConfig("switching", {"w": 2, "t": 1, "p_log_inv": 1, "sigma": 1,
                                         "circuits": {"n": 4, "dnfs": [[[1, 2], [3, 4]]]}}, mode="exhaustive")
    rep = run(cfg)
    res = rep["results"]["sigma-wise"]
    assert res["exact"] and res["ci_halfwidth"] == 0.0
    assert res["trials"] == 2 ** 6  # two coefficients in GF(2^3), since the stream has 8 bits


def test_star_exhaustive_identity():
    cfg = ExperimentConfig("star-reduction", {"k": 2, "n": 12, "p_log_inv": 1, "sigma": 1, "enforce": False,
                                              "target_class": {"dt": 1}}, mode="exhaustive", adversary="identity")
    rep = run(cfg)
    assert rep["ok"]
    adv = rep["results"]["adversaries"]["identity"]
    assert adv["randomness"] == 2 ** 12
    for cell in adv["messages"].values():
        assert cell["distance"] == "0" and cell["real"]["exact"]


def test_replay_determinism():
    cfg = dict(target="ss-reduction", params={"k": 1, "sigma": 4, "m": 1, "q": 1, "ell": 2,
                                              "uncoupled_trials": 20}, trials=20, master_seed=7)
    a = run_hybrid_replay(ExperimentConfig(**cfg))
    b = run_hybrid_replay(ExperimentConfig(**cfg))
    assert a["results"] == b["results"]
    c = run_hybrid_replay(ExperimentConfig(**{**cfg, "master_seed": 8}))
    assert c["results"]["adversaries"] != a["results"]["adversaries"]


def test_adversary_file_errors(tmp_path):
    with pytest.raises(FormatError, match="family"):
        adversaries.adversary_from_json({}, 4)
    with pytest.raises(FormatError, match="strictly increasing"):
        adversaries.adversary_from_json({"family": {"builtin": "identity"}, "final": [0, 2, 1, 3]}, 4)
    with pytest.raises(FormatError, match="rounds"):
        adversaries.adversary_from_json({"family": {"builtin": "identity"}, "rounds": 2, "leaks": [[0]]}, 4)
    adv = adversaries.adversary_from_json({"family": {"builtin": "random-local", "outputs": 8, "seed": 1},
                                           "leaks": [[0, 5]], "final": [0, 1, 2, 7]}, 4)
    assert adv.rounds == 1 and adv.out_len == 4


def test_suite_is_fixed():
    names = [name for name, _ in adversaries.suite(12)]
    assert len(names) == 20 and names[0] == "identity" and names[-1] == "adaptive-leak"
    a = adversaries.suite(12, seed=3)[12][1].family.tables
    b = adversaries.suite(12, seed=3)[12][1].family.tables
    assert (a == b).all()


# ---------------------------------------------------------------- command line

def test_cli_params(tmp_path, capsys):
    f = tmp_path / "p.json"
    f.write_text(json.dumps({"kind": "switching", "w": 2, "t": 2, "p": 2 ** -8, "delta": 0, "M": 1}))
    assert main(["params", str(f)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["values"]["bound"] == 0.048828125
    f.write_text(json.dumps({"kind": "star", "k": 2, "n": 19, "p_log_inv": 1, "sigma": 1, "m": 11}))
    assert main(["params", str(f)]) == 1
    f.write_text(json.dumps({"kind": "nothing"}))
    assert main(["params", str(f)]) == 2


def test_cli_encode_decode(tmp_path, capsys):
    pfile = tmp_path / "pipe.json"
    PipelineParams().save(pfile)
    assert main(["encode", "--pipeline", str(pfile), "--message", "1011", "--seed", "4"]) == 0
    word = json.loads(capsys.readouterr().out)["codeword"]
    assert len(word) == 2752
    (tmp_path / "c.txt").write_text(word)
    assert main(["decode", "--pipeline", str(pfile), "--codeword", "@" + str(tmp_path / "c.txt")]) == 0
    assert json.loads(capsys.readouterr().out) == {"message": "1011", "rejected": False}
    assert main(["encode", "--pipeline", str(pfile), "--message", "10"]) == 2
    assert main(["decode", "--pipeline", str(pfile), "--codeword", "0101"]) == 2


def test_cli_switching_outputs(tmp_path):
    cfg = tmp_path / "sw.json"
    cfg.write_text(json.dumps({"target": "switching", "trials": 200,
                               "params": {"w": 2, "t": 2, "p_log_inv": 2, "sigma": 2,
                                          "circuits": {"random": {"n": 16, "width": 2, "terms": 4, "count": 2}}}}))
    out, csv = tmp_path / "r.json", tmp_path / "r.csv"
    assert main(["switching", "--config", str(cfg), "--trials", "300", "--out", str(out), "--csv", str(csv)]) == 0
    rep = json.loads(out.read_text())
    assert rep["config"]["trials"] == 300 and rep["results"]["sigma-wise"]["trials"] == 300
    assert csv.read_text().startswith("table,source,failures")
    assert main(["hybrid-replay", "--config", str(cfg)]) == 2
    assert main(["switching", "--config", str(tmp_path / "missing.json")]) == 2
