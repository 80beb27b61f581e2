import csv

from banditrec.replay import EvaluationReport
from banditrec.reports import emit_plots, write_arm_report, write_metric_report

ARMS = ["EmpathicResponding", "Distraction"]


def _report(policy, fold, matched, rewards, auc):
    return EvaluationReport(
        policy_name=policy,
        fold=fold,
        seed=0,
        arm_names=ARMS,
        matched_counts=matched,
        expected_rewards=rewards,
        curves={
            "auc": auc,
            "ctr": [0.5, None],
            "precision": [1.0, 0.25],
            "recall": [None, None],
        },
    )


def _sample_reports():
    return [
        _report("LinUCB", 0, [4, 0], [0.5, None], [0.8, 0.6]),
        _report("LinUCB", 1, [2, 3], [1.0, 0.0], [None, 0.4]),
        _report("LogUCB", 0, [1, 1], [0.0, 1.0], [0.5, 0.5]),
    ]


def test_arm_report_schema_and_weighted_aggregation(tmp_path):
    path = tmp_path / "report_arms.csv"
    write_arm_report(_sample_reports(), path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["policy", "arm", "n_matched", "mean_expected_reward"]
    table = {(r[0], r[1]): (r[2], r[3]) for r in rows[1:]}
    # LinUCB arm 0: (0.5*4 + 1.0*2) / 6
    n, mean = table[("LinUCB", "EmpathicResponding")]
    assert n == "6"
    assert float(mean) == (0.5 * 4 + 1.0 * 2) / 6
    # LinUCB arm 1: only fold 1 matched
    assert table[("LinUCB", "Distraction")] == ("3", "0.0")
    assert table[("LogUCB", "Distraction")] == ("1", "1.0")
    # policies appear in sorted order
    assert [r[0] for r in rows[1:]] == sorted(r[0] for r in rows[1:])


def test_arm_report_unmatched_arm_serializes_empty(tmp_path):
    path = tmp_path / "arms.csv"
    write_arm_report([_report("LinTS", 0, [0, 2], [None, 0.5], [None, None])], path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[1] == ["LinTS", "EmpathicResponding", "0", ""]


def test_metric_report_rows_and_nulls(tmp_path):
    path = tmp_path / "report_metrics.csv"
    write_metric_report(_sample_reports(), path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["policy", "fold", "k", "auc", "ctr", "precision", "recall"]
    assert len(rows) == 1 + 3 * 2  # three (policy, fold) pairs, k = 1..2
    first = rows[1]
    assert first[:3] == ["LinUCB", "0", "1"]
    assert first[3] == "0.8"
    assert first[6] == ""  # None -> empty field
    # second fold, k=1 has undefined auc
    assert rows[3][:4] == ["LinUCB", "1", "1", ""]


def test_emit_plots_writes_five_svgs(tmp_path):
    written = emit_plots(_sample_reports(), tmp_path)
    names = sorted(p.name for p in written)
    assert names == [
        "auc.svg",
        "ctr.svg",
        "expected_rewards.svg",
        "precision.svg",
        "recall.svg",
    ]
    for p in written:
        head = p.read_text()[:200]
        assert "<svg" in head or "<?xml" in head


def test_emit_plots_byte_identical_across_runs(tmp_path):
    a = tmp_path / "a"
    b = tmp_path / "b"
    emit_plots(_sample_reports(), a)
    emit_plots(_sample_reports(), b)
    for name in ("expected_rewards.svg", "auc.svg", "recall.svg"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_emit_plots_no_data_annotation(tmp_path):
    written = emit_plots([], tmp_path)
    assert len(written) == 5
    # the all-None recall curve should also fall back to the annotation
    emit_plots(_sample_reports(), tmp_path)
    assert "no data" in (tmp_path / "recall.svg").read_text()
