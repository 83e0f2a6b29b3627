from pathlib import Path

import numpy as np
import pytest

from fairboost import (
    BoosterModel,
    BoosterParams,
    ContractError,
    Dataset,
    FAIR_LOGISTIC,
    LeafNode,
    ModelParseError,
    ModelStructureError,
    ModelVersionError,
    ObjectiveConfig,
    ParameterError,
    SplitNode,
    Tree,
    TreeParams,
    VANILLA_LOGISTIC,
    load_model,
    predict_proba,
    predict_raw,
    save_model,
    sigmoid,
    train,
)
from fairboost.bench import synthetic_biased
from fairboost.booster import _serialize

from conftest import make_random_tree

GOLDEN = Path(__file__).parent / "golden" / "reference_run.txt"


def small_params(**overrides):
    defaults = dict(
        num_rounds=5,
        learning_rate=0.3,
        objective=ObjectiveConfig(mu=0.0, kind=FAIR_LOGISTIC),
        tree=TreeParams(max_depth=3),
    )
    defaults.update(overrides)
    return BoosterParams(**defaults)


class TestBoosterParams:
    @pytest.mark.parametrize(
        "kwargs",
        [
            {"num_rounds": 0},
            {"num_rounds": 2.5},
            {"learning_rate": 0.0},
            {"learning_rate": 1.0001},
            {"base_score_raw": float("inf")},
        ],
    )
    def test_rejects_bad_values(self, kwargs):
        with pytest.raises(ParameterError):
            BoosterParams(**kwargs)

    def test_learning_rate_one_allowed(self):
        assert BoosterParams(learning_rate=1.0).learning_rate == 1.0

    def test_full_mu_needs_lambda(self):
        with pytest.raises(ParameterError):
            BoosterParams(objective=ObjectiveConfig(mu=1.0),
                          tree=TreeParams(reg_lambda=0.0))
        BoosterParams(objective=ObjectiveConfig(mu=1.0), tree=TreeParams(reg_lambda=1.0))


class TestTrain:
    def test_balanced_stump_predicts_base(self):
        data = Dataset(
            features=[[0.0], [0.0], [1.0], [1.0]],
            labels=[0, 1, 0, 1],
            sensitive=[0, 1, 0, 1],
            feature_names=("f0",),
        )
        params = BoosterParams(
            num_rounds=1,
            learning_rate=1.0,
            objective=ObjectiveConfig(mu=0.0),
            tree=TreeParams(max_depth=0, reg_lambda=0.0),
        )
        model, log = train(data, params)
        raw = predict_raw(model, data.features)
        assert np.array_equal(raw, np.zeros(4))
        assert np.array_equal(predict_proba(model, data.features), np.full(4, 0.5))
        assert len(log.records) == 1

    def test_mu_zero_fair_equals_vanilla_bitwise(self):
        data = synthetic_biased(n_rows=500, n_features=6, seed=21)
        fair, _ = train(data, small_params(
            num_rounds=20, objective=ObjectiveConfig(mu=0.0, kind=FAIR_LOGISTIC)))
        vanilla, _ = train(data, small_params(
            num_rounds=20, objective=ObjectiveConfig(mu=0.0, kind=VANILLA_LOGISTIC)))
        assert fair.trees == vanilla.trees
        assert np.array_equal(predict_raw(fair, data.features),
                              predict_raw(vanilla, data.features))

    def test_training_is_deterministic(self, small_data):
        first, _ = train(small_data, small_params())
        second, _ = train(small_data, small_params())
        assert _serialize(first) == _serialize(second)

    def test_full_mu_trains_stumps(self, small_data):
        model, log = train(small_data, small_params(
            objective=ObjectiveConfig(mu=1.0),
            tree=TreeParams(max_depth=3, reg_lambda=1.0),
        ))
        assert all(len(t.nodes) == 1 for t in model.trees)
        assert all(np.isfinite(r.loss) for r in log.records)

    def test_positive_mu_changes_the_model(self, small_data):
        plain, _ = train(small_data, small_params(num_rounds=10))
        fair, _ = train(small_data, small_params(
            num_rounds=10, objective=ObjectiveConfig(mu=0.5)))
        assert _serialize(plain) != _serialize(fair)

    def test_log_shape_and_round_indices(self, small_data):
        _, log = train(small_data, small_params(num_rounds=7))
        assert [r.round for r in log.records] == list(range(7))
        csv = log.to_csv()
        assert csv.startswith("round,loss,accuracy,di\n")
        assert len(csv.strip().splitlines()) == 8

    def test_single_group_data_rejected(self):
        from fairboost import DataError

        data = Dataset(features=[[1.0], [2.0]], labels=[0, 1], sensitive=[1, 1],
                       feature_names=("f0",))
        with pytest.raises(DataError, match="group"):
            train(data, small_params())

    def test_feature_names_recorded(self, small_data):
        model, _ = train(small_data, small_params(num_rounds=1))
        assert model.feature_names == small_data.feature_names


class TestPredict:
    def test_empty_ensemble_returns_base(self):
        model = BoosterModel(trees=(), params=BoosterParams(base_score_raw=0.25),
                             feature_names=("a", "b"))
        raw = predict_raw(model, np.zeros((3, 2)))
        assert np.array_equal(raw, np.full(3, 0.25))

    def test_constant_tree_shifts_by_eta(self):
        tree = Tree(nodes=[LeafNode(weight=1.0)])
        model = BoosterModel(
            trees=(tree,),
            params=BoosterParams(learning_rate=0.3, base_score_raw=0.0),
            feature_names=("a",),
        )
        assert np.array_equal(predict_raw(model, [[5.0]]), np.array([0.3]))

    def test_prefix_additivity(self, small_data):
        model, _ = train(small_data, small_params(num_rounds=8))
        raw = predict_raw(model, small_data.features)
        running = np.full(small_data.n_rows, model.params.base_score_raw)
        for k, tree in enumerate(model.trees, start=1):
            from fairboost import predict_tree_matrix

            running = running + model.params.learning_rate * predict_tree_matrix(
                tree, small_data.features)
            prefix = BoosterModel(trees=model.trees[:k], params=model.params,
                                  feature_names=model.feature_names)
            assert np.array_equal(predict_raw(prefix, small_data.features), running)
        assert np.array_equal(raw, running)

    def test_proba_is_sigmoid_of_raw(self, small_data):
        model, _ = train(small_data, small_params())
        raw = predict_raw(model, small_data.features)
        assert np.array_equal(predict_proba(model, small_data.features), sigmoid(raw))

    def test_row_validation(self, small_data):
        model, _ = train(small_data, small_params(num_rounds=1))
        with pytest.raises(ContractError):
            predict_raw(model, np.zeros((2, small_data.n_features + 1)))
        with pytest.raises(ContractError):
            predict_raw(model, np.zeros(small_data.n_features))
        bad = np.zeros((2, small_data.n_features))
        bad[0, 0] = np.nan
        with pytest.raises(ContractError):
            predict_raw(model, bad)


class TestSerialization:
    def test_round_trip_is_bit_exact(self, small_data, tmp_path):
        model, _ = train(small_data, small_params(
            num_rounds=6, objective=ObjectiveConfig(mu=0.35)))
        path = tmp_path / "model.fbm"
        save_model(model, path)
        loaded = load_model(path)
        assert loaded.trees == model.trees
        assert loaded.params == model.params
        assert loaded.feature_names == model.feature_names
        assert np.array_equal(predict_raw(loaded, small_data.features),
                              predict_raw(model, small_data.features))

    def test_round_trip_random_models(self, tmp_path):
        rng = np.random.default_rng(99)
        for trial in range(10):
            n_features = int(rng.integers(1, 6))
            trees = tuple(
                make_random_tree(rng, n_features, depth=int(rng.integers(0, 4)))
                for _ in range(int(rng.integers(0, 5)))
            )
            model = BoosterModel(
                trees=trees,
                params=BoosterParams(
                    num_rounds=max(1, len(trees)),
                    learning_rate=float(rng.uniform(0.01, 1.0)),
                    base_score_raw=float(rng.normal()),
                    objective=ObjectiveConfig(mu=float(rng.uniform(0, 1))),
                ),
                feature_names=tuple(f"f{j}" for j in range(n_features)),
            )
            path = tmp_path / f"model_{trial}.fbm"
            save_model(model, path)
            loaded = load_model(path)
            assert loaded.trees == model.trees
            assert loaded.params == model.params
            rows = rng.normal(size=(50, n_features))
            assert np.array_equal(predict_raw(loaded, rows), predict_raw(model, rows))

    def test_truncation_at_tree_boundary_loads_prefix(self, small_data, tmp_path):
        model, _ = train(small_data, small_params(num_rounds=8))
        text = _serialize(model)
        cut = text.index("tree 5\n")
        path = tmp_path / "prefix.fbm"
        path.write_text(text[:cut], encoding="utf-8")
        prefix = load_model(path)
        assert len(prefix.trees) == 5
        fresh, _ = train(small_data, small_params(num_rounds=5))
        assert np.array_equal(predict_raw(prefix, small_data.features),
                              predict_raw(fresh, small_data.features))

    def test_truncation_mid_record_names_byte_offset(self, small_data, tmp_path):
        model, _ = train(small_data, small_params(num_rounds=2))
        text = _serialize(model)
        record_at = text.index("node 0 split")
        path = tmp_path / "cut.fbm"
        path.write_text(text[: record_at + 8], encoding="utf-8")
        with pytest.raises(ModelParseError) as err:
            load_model(path)
        assert f"byte {record_at}" in str(err.value)

    def test_unknown_version_rejected(self, tmp_path):
        path = tmp_path / "v2.fbm"
        path.write_text("fairboost-model v2\nmu=0.0\n", encoding="utf-8")
        with pytest.raises(ModelVersionError):
            load_model(path)

    def test_garbage_header_rejected(self, tmp_path):
        path = tmp_path / "junk.fbm"
        path.write_text("hello world\n", encoding="utf-8")
        with pytest.raises(ModelParseError) as err:
            load_model(path)
        assert "byte 0" in str(err.value)

    def test_structurally_broken_tree_rejected(self, small_data, tmp_path):
        model, _ = train(small_data, small_params(num_rounds=1))
        text = _serialize(model)
        lines = text.splitlines()
        # drop the last leaf so a child reference dangles
        assert lines[-1].startswith("leaf")
        path = tmp_path / "broken.fbm"
        path.write_text("\n".join(lines[:-1]) + "\n", encoding="utf-8")
        with pytest.raises(ModelStructureError):
            load_model(path)

    def test_parse_errors(self, tmp_path, small_data):
        model, _ = train(small_data, small_params(num_rounds=1))
        text = _serialize(model)

        def expect(mutation, exc=ModelParseError):
            path = tmp_path / "bad.fbm"
            path.write_text(mutation, encoding="utf-8")
            with pytest.raises(exc):
                load_model(path)

        expect(text.replace("mu=", "nu="))                      # unknown key
        expect(text.replace("tree 0", "tree 3"))                # non-sequential
        expect(text.replace("learning_rate=", "learning_rate=abc", 1).replace(
            "=abc0.3", "=abc", 1))                              # unparseable float
        expect(text + "bogus record\n")                         # trailing junk
        expect(text.replace("\nnum_rounds=1", "", 1))           # missing key
        first_leaf = next(l for l in text.splitlines() if l.startswith("leaf"))
        expect(text.replace(first_leaf, first_leaf + "\n" + first_leaf, 1))  # dup id

    def test_save_writes_no_partial_file_on_bad_path(self, small_data, tmp_path):
        model, _ = train(small_data, small_params(num_rounds=1))
        missing_dir = tmp_path / "nope" / "model.fbm"
        with pytest.raises(OSError):
            save_model(model, missing_dir)
        assert not missing_dir.exists()


class TestGoldenReference:
    """Compare against a model trained by the naive reference implementation.

    tests/golden/reference_run.txt is produced by scripts/make_golden.py,
    which shares no training code with the package.
    """

    def setup_method(self):
        self.golden = load_model(GOLDEN)
        self.data = synthetic_biased(n_rows=150, n_features=5, seed=77)
        params = BoosterParams(
            num_rounds=10,
            learning_rate=0.3,
            base_score_raw=0.0,
            objective=ObjectiveConfig(mu=0.0, kind=VANILLA_LOGISTIC),
            tree=TreeParams(max_depth=3, reg_lambda=1.0, gamma=0.0, min_child_weight=1e-3),
        )
        self.model, _ = train(self.data, params)

    def test_identical_structures(self):
        assert len(self.model.trees) == len(self.golden.trees)
        for ours, ref in zip(self.model.trees, self.golden.trees):
            assert len(ours.nodes) == len(ref.nodes)
            for a, b in zip(ours.nodes, ref.nodes):
                assert type(a) is type(b)
                if isinstance(a, SplitNode):
                    assert (a.feature, a.left, a.right) == (b.feature, b.left, b.right)
                    assert a.threshold == pytest.approx(b.threshold, abs=1e-9)

    def test_leaf_weights_match(self):
        for ours, ref in zip(self.model.trees, self.golden.trees):
            for a, b in zip(ours.nodes, ref.nodes):
                if isinstance(a, LeafNode):
                    assert a.weight == pytest.approx(b.weight, abs=1e-6)

    def test_predictions_match(self):
        gap = np.max(np.abs(predict_raw(self.model, self.data.features)
                            - predict_raw(self.golden, self.data.features)))
        assert gap <= 1e-6
