"""Survey-augmentation pipeline: pairing, proxy quality, estimators, recovery."""

import math
from dataclasses import replace

import numpy as np
import pytest

from pxkit import (
    AccuracyModel,
    PopulationSpec,
    ProxyResponse,
    Stratum,
    collect_proxy_responses,
    compare_schemes,
    derive_seed,
    estimate_mean,
    filter_most_accurate,
    generate_population,
    load_population_spec,
)

TWO_STRATA = PopulationSpec(
    strata=(Stratum("A", 100, 0.0, 1.0), Stratum("B", 100, 10.0, 1.0)),
    attribute_prob=(0.9, 0.1),
    seed=7,
)
PERFECT = AccuracyModel(p_accurate=1.0, noise_sd=0.0)


class TestSpecValidation:
    def test_rejects_mismatched_probabilities(self):
        with pytest.raises(ValueError):
            PopulationSpec((Stratum("A", 10, 0, 1),), (0.5, 0.5), seed=0)

    def test_rejects_out_of_range_probability(self):
        with pytest.raises(ValueError):
            PopulationSpec((Stratum("A", 10, 0, 1),), (1.5,), seed=0)

    def test_rejects_bad_stratum(self):
        with pytest.raises(ValueError):
            Stratum("A", 0, 0.0, 1.0)
        with pytest.raises(ValueError):
            Stratum("A", 10, 0.0, -1.0)

    def test_rejects_duplicate_labels(self):
        with pytest.raises(ValueError):
            PopulationSpec(
                (Stratum("A", 10, 0, 1), Stratum("A", 10, 0, 1)), (0.5, 0.5), seed=0
            )


class TestGeneratePopulation:
    def test_respondent_counts_track_attribute_probabilities(self):
        counts = {"A": [], "B": []}
        for s in range(50):
            pop = generate_population(replace(TWO_STRATA, seed=s))
            for label in counts:
                counts[label].append(
                    sum(1 for u in pop.units if u.stratum == label and u.has_attribute)
                )
        assert np.mean(counts["A"]) == pytest.approx(90, abs=2)
        assert np.mean(counts["B"]) == pytest.approx(10, abs=2)

    def test_pairing_is_one_to_one_within_stratum(self):
        pop = generate_population(TWO_STRATA)
        by_id = {u.id: u for u in pop.units}
        seen_targets = set()
        for u in pop.units:
            if u.associate_id is not None:
                assert u.has_attribute
                target = by_id[u.associate_id]
                assert target.stratum == u.stratum
                assert not target.has_attribute
                assert target.id not in seen_targets
                seen_targets.add(target.id)

    def test_shortfall_reported_not_fatal(self):
        spec = PopulationSpec((Stratum("A", 20, 0.0, 1.0),), (0.95,), seed=3)
        pop = generate_population(spec)
        holders = sum(1 for u in pop.units if u.has_attribute)
        expected = max(0, holders - (20 - holders))
        assert pop.pairing_shortfall["A"] == expected

    def test_no_attribute_means_no_respondents(self):
        spec = replace(TWO_STRATA, attribute_prob=(0.0, 0.0))
        pop = generate_population(spec)
        assert not pop.respondents()
        with pytest.raises(ValueError):
            estimate_mean(pop, [], "naive_attribute_only")
        with pytest.raises(ValueError):
            estimate_mean(pop, [], "augmented")

    def test_determinism(self):
        assert generate_population(TWO_STRATA).units == generate_population(TWO_STRATA).units


class TestProxyResponses:
    def test_perfect_information(self):
        pop = generate_population(TWO_STRATA)
        by_id = {u.id: u for u in pop.units}
        responses = collect_proxy_responses(pop, PERFECT, seed=1)
        assert responses
        for r in responses:
            assert r.reported_value == by_id[r.target_id].true_value
            assert r.accuracy_score == 1.0

    def test_fully_noisy_reports_match_folded_normal_mean(self):
        # E|N(0,1)| = sqrt(2/pi) =~ 0.7979.
        spec = PopulationSpec(
            strata=(Stratum("A", 200, 0.0, 1.0),), attribute_prob=(0.5,), seed=0
        )
        acc = AccuracyModel(p_accurate=0.0, noise_sd=1.0)
        errs = []
        for s in range(60):
            pop = generate_population(replace(spec, seed=s))
            by_id = {u.id: u for u in pop.units}
            for r in collect_proxy_responses(pop, acc, seed=1000 + s):
                errs.append(abs(r.reported_value - by_id[r.target_id].true_value))
        assert np.mean(errs) == pytest.approx(math.sqrt(2 / math.pi), abs=0.02)

    def test_unpaired_respondents_emit_nothing(self):
        pop = generate_population(TWO_STRATA)
        paired = {u.id for u in pop.units if u.has_attribute and u.associate_id is not None}
        responses = collect_proxy_responses(pop, PERFECT, seed=2)
        assert {r.respondent_id for r in responses} == paired

    def test_determinism(self):
        pop = generate_population(TWO_STRATA)
        acc = AccuracyModel(0.5, 2.0)
        assert collect_proxy_responses(pop, acc, 9) == collect_proxy_responses(pop, acc, 9)

    def test_accuracy_model_validation(self):
        with pytest.raises(ValueError):
            AccuracyModel(1.2, 0.0)
        with pytest.raises(ValueError):
            AccuracyModel(0.5, -1.0)


def _resp(score, i=0):
    return ProxyResponse(respondent_id=i, target_id=100 + i, reported_value=0.0, accuracy_score=score)


class TestFilter:
    def test_quantile_one_keeps_all(self):
        rs = [_resp(s, i) for i, s in enumerate([0.9, 0.1, 0.5])]
        assert filter_most_accurate(rs, 1.0) == rs

    def test_equal_scores_all_kept(self):
        rs = [_resp(0.7, i) for i in range(5)]
        assert filter_most_accurate(rs, 0.2) == rs

    def test_half_quantile_cut(self):
        rs = [_resp(s, i) for i, s in enumerate([1.0, 1.0, 0.2, 0.1])]
        kept = filter_most_accurate(rs, 0.5)
        assert kept == rs[:2]

    def test_stable_order(self):
        rs = [_resp(s, i) for i, s in enumerate([0.5, 0.9, 0.5, 0.9])]
        kept = filter_most_accurate(rs, 0.5)
        assert [r.respondent_id for r in kept] == [1, 3]

    def test_empty_input_raises(self):
        with pytest.raises(ValueError):
            filter_most_accurate([], 0.5)
        with pytest.raises(ValueError):
            filter_most_accurate([_resp(1.0)], 0.0)


class TestEstimators:
    def test_srs_census_is_exact(self):
        pop = generate_population(TWO_STRATA)
        report = estimate_mean(pop, [], "srs_oracle", srs_size=len(pop.units), seed=3)
        assert report.estimate == pytest.approx(pop.true_mean, abs=1e-12)
        assert report.error == pytest.approx(0.0, abs=1e-12)

    def test_unknown_scheme(self):
        pop = generate_population(TWO_STRATA)
        with pytest.raises(ValueError):
            estimate_mean(pop, [], "bootstrap")

    def test_error_field_consistency(self):
        pop = generate_population(TWO_STRATA)
        responses = collect_proxy_responses(pop, PERFECT, seed=4)
        for scheme in ("naive_attribute_only", "augmented"):
            r = estimate_mean(pop, responses, scheme)
            assert r.error == r.estimate - r.true_population_mean

    def test_two_strata_bias_pattern(self):
        # Mostly-stratum-A respondents drag the naive mean toward 0 while
        # post-stratified augmentation stays centered on the true mean 5.
        naive, aug = [], []
        for rep in range(300):
            pop = generate_population(replace(TWO_STRATA, seed=derive_seed(5, rep)))
            responses = collect_proxy_responses(pop, PERFECT, seed=derive_seed(6, rep))
            naive.append(estimate_mean(pop, responses, "naive_attribute_only").error)
            aug.append(estimate_mean(pop, responses, "augmented").error)
        assert np.mean(naive) == pytest.approx(-4.0, abs=0.15)
        aug_se = np.std(aug, ddof=1) / math.sqrt(len(aug))
        assert abs(np.mean(aug)) < 2 * aug_se + 1e-9


class TestCompareSchemes:
    def test_determinism(self):
        a = compare_schemes(TWO_STRATA, PERFECT, 1.0, 50, seed=1)
        b = compare_schemes(TWO_STRATA, PERFECT, 1.0, 50, seed=1)
        assert a.mean_error == b.mean_error
        assert a.rmse == b.rmse

    def test_accuracy_assumption_is_necessary(self):
        clean = compare_schemes(TWO_STRATA, PERFECT, 1.0, 100, seed=2)
        noisy = compare_schemes(TWO_STRATA, AccuracyModel(0.0, 100.0), 1.0, 100, seed=2)
        assert noisy.rmse["augmented"] > 10 * clean.rmse["augmented"]

    def test_no_confounding_leaves_both_unbiased(self):
        spec = PopulationSpec(
            strata=(Stratum("A", 100, 1.0, 1.0), Stratum("B", 100, 1.0, 1.0)),
            attribute_prob=(0.5, 0.5),
            seed=0,
        )
        comp = compare_schemes(spec, PERFECT, 1.0, 200, seed=3)
        for scheme in ("naive_attribute_only", "augmented"):
            assert abs(comp.mean_error[scheme]) < 2 * comp.stderr_mean[scheme] + 1e-9

    def test_stratum_coverage(self):
        # With positive attribute probability everywhere, the augmented data
        # should cover every stratum in at least 99% of replications.
        covered = 0
        reps = 200
        for rep in range(reps):
            pop = generate_population(replace(TWO_STRATA, seed=derive_seed(8, rep)))
            responses = collect_proxy_responses(pop, PERFECT, seed=derive_seed(9, rep))
            strata_with_data = {u.stratum for u in pop.units if u.has_attribute}
            by_id = {u.id: u for u in pop.units}
            strata_with_data |= {by_id[r.target_id].stratum for r in responses}
            covered += strata_with_data == {"A", "B"}
        assert covered / reps >= 0.99

    def test_minimum_replications(self):
        with pytest.raises(ValueError):
            compare_schemes(TWO_STRATA, PERFECT, 1.0, 5, seed=0)


def test_population_spec_config_roundtrip(tmp_path):
    path = tmp_path / "pop.ini"
    path.write_text(
        "[population]\nseed = 7\nstrata =\n    A, 100, 0.0, 1.0, 0.9\n    B, 100, 10.0, 1.0, 0.1\n",
        encoding="utf-8",
    )
    spec = load_population_spec(path)
    assert spec == TWO_STRATA


def test_population_spec_config_errors(tmp_path):
    path = tmp_path / "pop.ini"
    path.write_text("[population]\nseed = 7\n", encoding="utf-8")
    with pytest.raises(ValueError, match="strata"):
        load_population_spec(path)
    path.write_text("[population]\nstrata =\n    A, 100, 0.0\n", encoding="utf-8")
    with pytest.raises(ValueError, match="stratum line"):
        load_population_spec(path)
    path.write_text("[population]\nbogus = 1\nstrata =\n    A, 10, 0, 1, 0.5\n", encoding="utf-8")
    with pytest.raises(ValueError, match="bogus"):
        load_population_spec(path)
