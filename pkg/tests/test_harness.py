import json

import numpy as np
import pytest

from recvariants.core import ConfigurationError, EmptyInputError, GroundTruth, Interaction, RankedPredictions
from recvariants.harness import (
    Cell,
    EvaluationReport,
    Family,
    VariantSpec,
    evaluate_matrix,
    family_of_label,
    fingerprint,
    load_registry,
    registry_default,
    registry_extended,
    render_report,
    select_variants,
)
from recvariants.oracle import pair_enumeration_auc
from recvariants import synthetic


def hand_dataset():
    preds = RankedPredictions({"u": [(f"i{j}", 1.0 - 0.1 * j) for j in range(1, 6)]})
    truth = GroundTruth({"u": {"i2": 5.0, "i5": 4.5}})
    # catalog i1..i7 and t0..t2; user u trained on t0..t2
    train = tuple(Interaction("u", f"t{j}", 5.0, j) for j in range(3))
    train += tuple(Interaction("v", f"i{j}", 5.0, j) for j in range(1, 8))
    return preds, truth, train


def test_registry_default():
    reg = registry_default()
    assert len(reg) == 21
    names = [s.name for s in reg]
    assert len(set(names)) == 21
    assert "map@k/by_min" in names and "auc/gauc_uniform" in names
    counts = {f: sum(s.family is f for s in reg) for f in Family}
    assert counts == {
        Family.PRECISION: 1,
        Family.RECALL: 2,
        Family.HITRATE: 2,
        Family.MRR: 2,
        Family.MAP: 4,
        Family.NDCG: 4,
        Family.AUC: 6,
    }


def test_registry_extended_has_ln_variant():
    assert registry_extended()[-1].params["log_base"] == pytest.approx(np.e)


def test_variant_spec_validation():
    with pytest.raises(ConfigurationError):
        VariantSpec("x", "map", {"averaging": "by_min", "drop_hit_indicator": True})
    with pytest.raises(ConfigurationError):
        VariantSpec("x", "recall", {"denominator": "bogus"})
    with pytest.raises(ConfigurationError):
        VariantSpec("x", "precision", {"unexpected": 1})
    with pytest.raises(ConfigurationError):
        VariantSpec("x", "auc", {})


def test_load_registry_roundtrip():
    reg = registry_default()
    again = load_registry(json.dumps([s.to_dict() for s in reg]))
    assert [s.to_dict() for s in again] == [s.to_dict() for s in reg]
    with pytest.raises(ConfigurationError, match="duplicate"):
        load_registry([reg[0].to_dict(), reg[0].to_dict()])


def test_select_variants():
    reg = registry_default()
    assert select_variants(reg, "all") == reg
    picked = select_variants(reg, "precision@k,auc/stacked")
    assert [s.name for s in picked] == ["precision@k", "auc/stacked"]
    with pytest.raises(ConfigurationError):
        select_variants(reg, "nope")


def test_hand_fixture_report():
    preds, truth, train = hand_dataset()
    report = evaluate_matrix(preds, truth, train, k=5)
    expected = {
        "precision@k": 0.4,
        "hitrate@k/indicator": 1.0,
        "hitrate@k/hit_count": 2.0,
        "mrr@k/first_hit": 0.5,
        "mrr@k/sum_of_hits": 0.7,
        "map@k/by_relevant": 0.45,
        "map@k/by_k": 0.18,
        "map@k/by_min": 0.45,
        "map@k/by_k_all_positions": 89 / 300,
        "ndcg@k/binary": 0.62405052000383778,
        "ndcg@k/weighted": 0.62549470496399358,
        "ndcg@k/binary_unnormalized": 1.01778256080599902,
    }
    for name, value in expected.items():
        assert report.value(name) == pytest.approx(value, abs=1e-12), name


def test_full_ranking_auc_against_brute_force():
    preds, truth, train = hand_dataset()
    # candidates for u: i1..i7 (t* are u's training items); i6, i7 unranked and tied at the bottom
    labelled = [(0.9, False), (0.8, True), (0.7, False), (0.6, False), (0.5, True), (-0.5, False), (-0.5, False)]
    expected = pair_enumeration_auc(labelled)
    report = evaluate_matrix(preds, truth, train, k=5)
    for name in ("auc/stacked", "auc/ratio_of_averages", "auc/gauc_uniform", "auc/gauc_weighted"):
        assert report.value(name) == pytest.approx(expected, abs=1e-15)
    # LAUC: hits at ranks 2 and 5 of 5 candidates, P=2, N=5
    assert report.value("auc/lauc@k") == pytest.approx(expected, abs=1e-15)
    # GAUC@5 over [-, +, -, -, +]: 2 of 6 pairs ordered correctly
    assert report.value("auc/gauc@k") == pytest.approx(1 / 3, abs=1e-15)


def test_two_identical_users_match_one():
    preds, truth, train = hand_dataset()
    one = evaluate_matrix(preds, truth, train, k=5)
    preds2 = RankedPredictions({"u": preds["u"], "w": preds["u"]})
    truth2 = GroundTruth({"u": truth["u"], "w": truth["u"]})
    train2 = train + tuple(Interaction("w", x.item, x.rating, x.timestamp) for x in train if x.user == "u")
    two = evaluate_matrix(preds2, truth2, train2, k=5)
    for a, b in zip(one.cells, two.cells):
        assert a.value == pytest.approx(b.value, abs=1e-15), a.spec.name


def test_missing_user_scores_zero():
    preds, truth, train = hand_dataset()
    truth2 = GroundTruth({"u": truth["u"], "ghost": {"i1": 5.0}})
    report = evaluate_matrix(preds, truth2, train, k=5, keep_per_user=True)
    assert report.value("precision@k") == pytest.approx(0.2)
    assert report.per_user["auc/gauc_uniform"]["ghost"] == 0.0


def test_errors():
    preds, truth, train = hand_dataset()
    with pytest.raises(EmptyInputError):
        evaluate_matrix(preds, GroundTruth({}), train)
    with pytest.raises(ConfigurationError):
        evaluate_matrix(preds, GroundTruth({"u": ["i2"]}), train)
    binary_only = [s for s in registry_default() if s.params.get("gain") != "exponential"]
    evaluate_matrix(preds, GroundTruth({"u": ["i2"]}), train, binary_only, k=5)


def _corpus(seed=0, users=60, items=120, rows=3000):
    model = synthetic.LatentModel(users, items, seed=seed)
    log = synthetic.interaction_log(model, rows, seed=seed)
    from recvariants.ingest import SplitConfig, extract_ground_truth, split_protocol

    train, test = split_protocol(log, SplitConfig(3.5, 0.3))
    truth = extract_ground_truth(test)
    preds = synthetic.predictions(model, train, set(truth) | {x.user for x in train}, depth=40, seed=seed)
    return preds, truth, train


def test_workers_do_not_change_output():
    preds, truth, train = _corpus()
    outs = {render_report(evaluate_matrix(preds, truth, train, k=10, workers=w)) for w in (1, 3, 7)}
    assert len(outs) == 1


def test_removing_a_user_only_removes_its_contribution():
    preds, truth, train = _corpus(seed=2)
    full = evaluate_matrix(preds, truth, train, k=10, keep_per_user=True)
    victim = sorted(truth)[0]
    rest = GroundTruth({u: truth[u] for u in truth if u != victim})
    smaller = evaluate_matrix(preds, rest, train, k=10)
    for cell in smaller.cells:
        if cell.spec.family is Family.AUC:
            continue
        values = full.per_user[cell.spec.name]
        expected = sum(v for u, v in values.items() if u != victim) / len(rest)
        assert cell.value == pytest.approx(expected, abs=1e-12)


def test_render_formats():
    preds, truth, train = hand_dataset()
    report = evaluate_matrix(preds, truth, train, registry_default()[:1], k=5, dataset="demo")
    doc = json.loads(render_report(report, "json"))
    assert doc == {
        "dataset": "demo",
        "k": 5,
        "cells": [{"name": "precision@k", "family": "precision", "params": {}, "value": 0.4, "users": 1}],
    }
    md = render_report(report, "markdown").decode().splitlines()
    assert md[0] == "| dataset | k | precision@k |" and md[2] == "| demo | 5 | 0.400000 |"
    assert render_report(report, "csv").decode().splitlines() == ["name,family,value,users", "precision@k,precision,0.400000,1"]
    assert render_report(report, "json") == render_report(report, "json")


def test_render_empty_report():
    empty = EvaluationReport("x", 20, [])
    assert json.loads(render_report(empty, "json"))["cells"] == []
    assert render_report(empty, "markdown").decode().splitlines()[2] == "| x | 20 |"
    assert render_report(empty, "csv") == b"name,family,value,users\n"


def test_report_json_roundtrip():
    preds, truth, train = hand_dataset()
    report = evaluate_matrix(preds, truth, train, k=5)
    again = EvaluationReport.from_dict(json.loads(render_report(report)))
    assert render_report(again) == render_report(report)


def _map_report():
    specs = {s.name: s for s in registry_default()}
    values = {"map@k/by_relevant": 0.032, "map@k/by_k": 0.023, "map@k/by_min": 0.039, "map@k/by_k_all_positions": 0.073}
    return EvaluationReport("ml-20m", 20, [Cell(specs[n], v, 100) for n, v in values.items()])


def test_fingerprint_map():
    result = fingerprint({"MAP@20": 0.032}, _map_report(), 0.0005)
    assert [n for n, _ in result.matches[0].candidates] == ["map@k/by_relevant"]
    assert result.best("MAP@20") == "map@k/by_relevant"


def test_fingerprint_edge_cases():
    assert fingerprint({}, _map_report()).matches == ()
    result = fingerprint([("Coverage", 0.5), ("MAP", 0.5)], _map_report())
    assert result.unmatched == ("Coverage",)
    assert result.matches[0].candidates == ()
    with pytest.raises(ConfigurationError):
        fingerprint({}, _map_report(), 0)


@pytest.mark.parametrize(
    "label,family",
    [("HitRate@20", Family.HITRATE), ("RocAuc", Family.AUC), ("NDCG@10", Family.NDCG), ("map@k/by_min", Family.MAP), ("ARHR", Family.MRR), ("hit_rate", Family.HITRATE), ("novelty", None)],
)
def test_family_of_label(label, family):
    assert family_of_label(label) is family
