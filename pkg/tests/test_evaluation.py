import numpy as np
import pytest
from sklearn.metrics import precision_recall_fscore_support

from dialact.evaluation import (
    ClassReport,
    ConfusionMatrix,
    EvalError,
    averages,
    evaluate,
    precision_recall_f1,
    render_confusion,
    render_metrics_csv,
    render_results_table,
    round_half_up,
)
from dialact.models import ArchitectureKind, ModelConfig, build_model
from dialact.representation import SentenceEmbeddingStore
from dialact.tags import default_tagset
from dialact.training import EncoderContext

from conftest import build_dataset

rng = np.random.default_rng(99)


def cm_from_pairs(pairs):
    """Independent confusion builder: plain loops over (true, pred) ids."""
    ts = default_tagset()
    counts = np.zeros((42, 42), dtype=np.int64)
    for t, p in pairs:
        counts[t][p] += 1
    return ConfusionMatrix(ts.labels, counts)


# ---------------------------------------------------------------------------
# metric arithmetic
# ---------------------------------------------------------------------------

def test_f1_of_published_sd_row_rounds_to_066():
    p, r = 0.51, 0.92
    f1 = 2 * p * r / (p + r)
    assert round_half_up(f1, 2) == 0.66


def test_round_half_up_ties():
    assert round_half_up(0.005, 2) == 0.01
    assert round_half_up(0.5071, 4) == 0.5071
    assert round_half_up(0.66665, 4) == 0.6667


def test_hand_computed_three_class_report():
    ts = default_tagset()
    sd, b, qy = ts.by_label("sd").id, ts.by_label("b").id, ts.by_label("qy").id
    pairs = [(sd, sd), (sd, b), (sd, sd), (b, b), (b, qy), (qy, qy)]
    report = precision_recall_f1(cm_from_pairs(pairs))
    assert report.precision[sd] == pytest.approx(1.0)
    assert report.precision[b] == pytest.approx(0.5)
    assert report.precision[qy] == pytest.approx(0.5)
    assert report.recall[sd] == pytest.approx(2 / 3)
    assert report.recall[b] == pytest.approx(0.5)
    assert report.recall[qy] == pytest.approx(1.0)
    assert report.f1[sd] == pytest.approx(0.8)
    assert report.f1[b] == pytest.approx(0.5)
    assert report.f1[qy] == pytest.approx(2 / 3)
    assert report.support[sd] == 3


def test_metrics_match_sklearn_oracle_on_random_predictions():
    for _ in range(5):
        n = int(rng.integers(30, 200))
        true = rng.integers(0, 42, n)
        pred = np.where(rng.random(n) < 0.5, true, rng.integers(0, 42, n))
        report = precision_recall_f1(cm_from_pairs(list(zip(true, pred))))
        p, r, f, s = precision_recall_fscore_support(
            true, pred, labels=np.arange(42), zero_division=0
        )
        assert np.allclose(report.precision, p)
        assert np.allclose(report.recall, r)
        assert np.allclose(report.f1, f)
        assert np.array_equal(report.support, s)
        macro, weighted = averages(report)
        pm, rm, fm, _ = precision_recall_fscore_support(
            true, pred, labels=np.arange(42), average="macro", zero_division=0
        )
        assert macro == pytest.approx((pm, rm, fm))
        pw, rw, fw, _ = precision_recall_fscore_support(
            true, pred, labels=np.arange(42), average="weighted", zero_division=0
        )
        assert weighted == pytest.approx((pw, rw, fw))


def test_zero_support_class_yields_all_zeros():
    ts = default_tagset()
    pairs = [(0, 0), (0, 0)]
    report = precision_recall_f1(cm_from_pairs(pairs))
    qh = ts.by_label("qh").id
    assert (report.precision[qh], report.recall[qh], report.f1[qh]) == (0.0, 0.0, 0.0)
    assert report.support[qh] == 0


def test_identity_confusion_gives_perfect_metrics():
    cm = ConfusionMatrix(default_tagset().labels, np.eye(42, dtype=np.int64) * 3)
    report = precision_recall_f1(cm)
    assert np.all(report.precision == 1.0)
    assert np.all(report.recall == 1.0)
    assert np.all(report.f1 == 1.0)


def test_averages_identical_metrics_collapse():
    report = ClassReport(
        ("a", "b"), np.array([0.7, 0.7]), np.array([0.4, 0.4]),
        np.array([0.5, 0.5]), np.array([3, 9]),
    )
    macro, weighted = averages(report)
    assert macro == pytest.approx((0.7, 0.4, 0.5))
    assert weighted == pytest.approx((0.7, 0.4, 0.5))


def test_averages_weighted_vs_macro():
    report = ClassReport(
        ("a", "b"), np.array([1.0, 0.0]), np.array([1.0, 0.0]),
        np.array([1.0, 0.0]), np.array([9, 1]),
    )
    macro, weighted = averages(report)
    assert macro[0] == pytest.approx(0.5)
    assert weighted[0] == pytest.approx(0.9)


def test_recall_depends_only_on_its_own_row():
    ts = default_tagset()
    sd = ts.by_label("sd").id
    counts = np.zeros((42, 42), dtype=np.int64)
    counts[sd, sd] = 8
    counts[sd, 1] = 2
    counts[2, 2] = 5
    base = precision_recall_f1(ConfusionMatrix(ts.labels, counts))
    scaled = counts.copy()
    scaled[2] *= 7  # inflate another true class
    after = precision_recall_f1(ConfusionMatrix(ts.labels, scaled))
    assert base.recall[sd] == after.recall[sd] == pytest.approx(0.8)


# ---------------------------------------------------------------------------
# evaluate()
# ---------------------------------------------------------------------------

def onehot_store(dataset, dim=42):
    entries = {}
    for u in dataset.utterances:
        v = np.zeros(dim)
        v[u.tag.id] = 1.0
        entries[(u.dialogue_id, u.turn_index)] = v
    return SentenceEmbeddingStore(dim, entries)


@pytest.fixture
def eval_dataset():
    rows = []
    for i, tag in enumerate(["sd"] * 5 + ["b"] * 3 + ["qy"] * 2):
        rows.append((f"d{i % 2}", "A", f"utterance {i}", tag))
    rows.sort(key=lambda r: r[0])
    return build_dataset(rows)


def perfect_model():
    mc = ModelConfig(ArchitectureKind.BERT_HEAD, input_dim=42, seed=0)
    model = build_model(mc)
    model.params["out.W"] = np.eye(42) * 10.0
    model.params["out.b"] = np.zeros(42)
    return model


def constant_model(tag_id):
    mc = ModelConfig(ArchitectureKind.BERT_HEAD, input_dim=42, seed=0)
    model = build_model(mc)
    model.params["out.W"] = np.zeros((42, 42))
    b = np.zeros(42)
    b[tag_id] = 10.0
    model.params["out.b"] = b
    return model


def test_perfect_predictor_reports_accuracy_one(eval_dataset):
    ctx = EncoderContext(sentence_store=onehot_store(eval_dataset))
    report = evaluate(perfect_model(), eval_dataset, ctx)
    assert report.accuracy == 1.0
    off_diag = report.confusion.counts.copy()
    np.fill_diagonal(off_diag, 0)
    assert off_diag.sum() == 0
    assert report.confusion.total == len(eval_dataset)


def test_constant_predictor_accuracy_is_class_share(eval_dataset):
    sd = default_tagset().by_label("sd").id
    ctx = EncoderContext(sentence_store=onehot_store(eval_dataset))
    report = evaluate(constant_model(sd), eval_dataset, ctx)
    assert report.accuracy == pytest.approx(5 / 10)
    assert report.confusion.counts[:, sd].sum() == 10


def test_evaluate_report_invariants(eval_dataset):
    ctx = EncoderContext(sentence_store=onehot_store(eval_dataset))
    report = evaluate(constant_model(3), eval_dataset, ctx)
    cm = report.confusion
    assert report.accuracy == pytest.approx(np.trace(cm.counts) / cm.total)
    assert np.array_equal(cm.support(), report.class_report.support)


def test_twenty_utterance_report_matches_hand_computation(make_dataset):
    # 20 utterances with hand-chosen predictions; expectations below were
    # computed by hand from the resulting confusion counts
    ts = default_tagset()
    truth_pred = (
        [("sd", "sd")] * 6 + [("sd", "sv")] + [("sd", "b")]
        + [("sv", "sv")] * 3 + [("sv", "sd")] * 2
        + [("qy", "qy")] * 4
        + [("b", "b")] + [("b", "sd")] * 2
    )
    assert len(truth_pred) == 20
    rows = [("d0", "A", f"u{i}", true) for i, (true, _) in enumerate(truth_pred)]
    ds = make_dataset(rows)
    # the stored "sentence vector" encodes the prediction we want the
    # perfect linear model to emit
    entries = {}
    for u, (_, pred) in zip(ds.utterances, truth_pred):
        v = np.zeros(42)
        v[ts.by_label(pred).id] = 1.0
        entries[(u.dialogue_id, u.turn_index)] = v
    ctx = EncoderContext(sentence_store=SentenceEmbeddingStore(42, entries))
    report = evaluate(perfect_model(), ds, ctx)

    sd, sv, qy, b = (ts.by_label(x).id for x in ("sd", "sv", "qy", "b"))
    assert report.accuracy == pytest.approx(0.7)
    cr = report.class_report
    assert cr.precision[sd] == pytest.approx(0.6)
    assert cr.precision[sv] == pytest.approx(0.75)
    assert cr.precision[qy] == pytest.approx(1.0)
    assert cr.precision[b] == pytest.approx(0.5)
    assert cr.recall[sd] == pytest.approx(0.75)
    assert cr.recall[b] == pytest.approx(1 / 3)
    assert cr.f1[sd] == pytest.approx(2 / 3)
    assert cr.f1[b] == pytest.approx(0.4)
    assert list(cr.support[[sd, sv, qy, b]]) == [8, 5, 4, 3]
    macro, weighted = report.macro_avg, report.weighted_avg
    assert macro[0] == pytest.approx(2.85 / 42)
    assert macro[2] == pytest.approx((2 / 3 + 2 / 3 + 1 + 0.4) / 42)
    assert weighted[0] == pytest.approx(0.7025)
    assert weighted[1] == pytest.approx(0.7)  # support-weighted recall == accuracy
    assert weighted[2] == pytest.approx(13.866666666666667 / 20)


def test_evaluate_rejects_unlabeled(eval_dataset, make_dataset):
    ds = make_dataset([("d", "A", "unlabeled", None)])
    ctx = EncoderContext(sentence_store=onehot_store(eval_dataset))
    with pytest.raises(EvalError):
        evaluate(perfect_model(), ds, ctx)


# ---------------------------------------------------------------------------
# rendering
# ---------------------------------------------------------------------------

def test_confusion_csv_exact_bytes():
    cm = ConfusionMatrix(("sd", "b"), np.array([[3, 1], [0, 2]], dtype=np.int64))
    assert render_confusion(cm, "csv") == b",sd,b\nsd,3,1\nb,0,2\n"


def test_confusion_support_filter_keeps_top_classes():
    ts = default_tagset()
    counts = np.zeros((42, 42), dtype=np.int64)
    tops = {"sv": 40, "sd": 35, "aa": 10, "b": 8, "%": 6}
    for label, support in tops.items():
        i = ts.by_label(label).id
        counts[i, i] = support
    counts[ts.by_label("qy").id, ts.by_label("qy").id] = 2  # below the bar
    cm = ConfusionMatrix(ts.labels, counts)
    kept = cm.filter_by_support(5)
    assert set(kept.labels) == set(tops)
    assert kept.counts.shape == (5, 5)


def test_confusion_svg_deterministic_and_self_contained():
    cm = ConfusionMatrix(("sd", "b"), np.array([[3, 1], [0, 2]], dtype=np.int64))
    svg1 = render_confusion(cm, "svg")
    svg2 = render_confusion(cm, "svg")
    assert svg1 == svg2
    text = svg1.decode("utf-8")
    assert text.startswith("<svg ")
    assert "http" not in text.replace("http://www.w3.org/2000/svg", "")


def test_results_table_reference_numbers():
    rows = [
        ("GloVe+LSTM", 0.5089, 0.5195, 0.3714),
        ("Prob+LSTM", 0.7672, 0.7694, 0.4412),
        ("USE", 0.7247, 0.6951, 0.5071),
        ("USE+LSTM", 0.3841, 0.4257, 0.4074),
        ("BERT", 0.7151, 0.7151, 0.4063),
    ]
    text = render_results_table(rows, "text").decode("utf-8")
    lines = text.splitlines()
    assert lines[0].split() == ["model", "acc", "val_acc", "test_acc"]
    use_line = next(l for l in lines if l.startswith("USE "))
    assert use_line.split() == ["USE", "0.7247", "0.6951", "0.5071"]


def test_results_table_empty_and_single():
    assert render_results_table([], "text").decode().splitlines() == [
        "model  acc  val_acc  test_acc"
    ]
    two_lines = render_results_table([("m", 1.0, None, 0.5)], "text").decode()
    assert len(two_lines.splitlines()) == 2


def test_results_table_csv():
    out = render_results_table([("m", 0.12345, 0.5, 0.25)], "csv").decode()
    assert out.splitlines()[1] == "m,0.1235,0.5000,0.2500"


def test_metrics_csv_reloads_to_full_precision(eval_dataset):
    ctx = EncoderContext(sentence_store=onehot_store(eval_dataset))
    report = evaluate(constant_model(0), eval_dataset, ctx)
    blob = render_metrics_csv(report).decode("utf-8")
    lines = blob.splitlines()
    assert lines[0] == "tag,precision,recall,f1,support"
    body = [l.split(",") for l in lines[1:]]
    assert len(body) == 44  # 42 classes + macro + weighted
    for i, row in enumerate(body[:42]):
        assert float(row[1]) == report.class_report.precision[i]
        assert float(row[2]) == report.class_report.recall[i]
        assert float(row[3]) == report.class_report.f1[i]
    assert body[42][0] == "macro"
    assert float(body[42][1]) == report.macro_avg[0]
    assert body[43][0] == "weighted"
    assert float(body[43][3]) == report.weighted_avg[2]
