import numpy as np
import pytest

import dmic


def test_fixture_clusters_into_three():
    a = dmic.fixture("dmi_20x3")
    r = dmic.dmi_cluster(a)
    assert r["k"] == 3
    assert len(r["labels"]) == 20
    assert r["score"] == pytest.approx(dmic.dmi_score(r["labels"], a))


def test_legal_input_is_recovered():
    rng = np.random.default_rng(0)
    truth = np.array([0, 1, 2] + list(rng.integers(0, 3, 9)))
    b = np.array([[0.0, 1.0], [2.0, -1.0], [1.5, 3.0]])
    r = dmic.dmi_cluster(b[truth])
    pairs = set(zip(truth.tolist(), r["labels"]))
    assert len(pairs) == 3


def test_surprisingly_popular():
    option, tied, _ = dmic.surprisingly_popular_choice([0.56, 0.40, 0.04], [0.70, 0.26, 0.04])
    assert option == 1
    assert not tied


def test_reports_and_payments():
    answers, truth = dmic.simulate_reports("legal_pure", seed=1, agents=60)
    assert answers.shape == (60, 60)
    ext = dmic.extract_knowledge(answers, 3)
    assert len(set(zip(truth, ext["labels"]))) == 3
    out = dmic.kdmi_payments(answers, 3, seed=2)
    assert len(out["payments"]) == 60
    assert all(p["status"] == "paid" for p in out["payments"])


def test_spectral_truth_serum():
    signals = [0, 0, 0, 1, 1, 2, 3, 0, 1, 2]
    preds = np.tile([0.4, 0.3, 0.2, 0.1], (10, 1))
    with pytest.raises(dmic.DmicError) as info:
        dmic.spectral_truth_serum(signals, preds)
    assert info.value.code == "DegenerateSpectrum"


def test_errors_carry_codes():
    with pytest.raises(dmic.DmicError) as info:
        dmic.fixture("nope")
    assert info.value.code == "UnknownFixture"
    with pytest.raises(dmic.DmicError):
        dmic.dmi_cluster(np.array([[np.nan, 1.0]]))
