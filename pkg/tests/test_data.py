"""CSV loading, preprocessing rules, and the delta/psi encodings."""

import numpy as np
import pytest

from seqsel.data import (
    Dataset,
    OrdinalEncoding,
    PreprocessOptions,
    PreprocessWarning,
    RawTable,
    dataset_to_csv,
    encode_labels,
    load_csv,
    preprocess,
)


def write(tmp_path, text, name="data.csv"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


class TestLoadCsv:
    def test_three_line_csv(self, tmp_path):
        path = write(tmp_path, "a,b,y\n1,2,1\n3,4,2\n")
        table = load_csv(path, "y")
        assert table.c == 3
        assert table.n == 2
        assert table.label_col == 2

    def test_ragged_row_reports_position(self, tmp_path):
        path = write(tmp_path, "a,b,y\n1,2,1\n3,4\n")
        with pytest.raises(ValueError, match="ragged row 2"):
            load_csv(path, "y")

    def test_missing_label_column(self, tmp_path):
        path = write(tmp_path, "a,b\n1,2\n")
        with pytest.raises(ValueError, match="label column 'y'"):
            load_csv(path, "y")

    def test_missing_file(self, tmp_path):
        with pytest.raises(ValueError, match="cannot read"):
            load_csv(tmp_path / "nope.csv", "y")

    def test_semicolon_delimiter(self, tmp_path):
        path = write(tmp_path, "a;b;quality\n1;2;5\n3;4;6\n")
        table = load_csv(path, "quality")
        assert table.c == 3
        assert table.cells[0] == ("1", "2", "5")

    def test_tab_delimiter(self, tmp_path):
        path = write(tmp_path, "a\tb\ty\n1\t2\t1\n")
        assert load_csv(path, "y").c == 3

    def test_row_order_preserved(self, tmp_path):
        path = write(tmp_path, "a,y\n9,1\n7,2\n8,1\n")
        table = load_csv(path, "y")
        assert [row[0] for row in table.cells] == ["9", "7", "8"]


class TestPreprocess:
    def test_standardization_population_sd(self, tmp_path):
        path = write(tmp_path, "a,y\n1,1\n2,2\n3,1\n")
        data = preprocess(load_csv(path, "y"))
        np.testing.assert_allclose(
            data.X[:, 0],
            [-1.224744871391589, 0.0, 1.224744871391589],
            atol=1e-12,
        )
        assert abs(data.X[:, 0].mean()) <= 1e-9
        assert abs(data.X[:, 0].std() - 1.0) <= 1e-9

    def test_two_level_categorical_single_dummy(self, tmp_path):
        path = write(tmp_path, "color,y\nred,1\nblue,2\nblue,1\n")
        data = preprocess(load_csv(path, "y"), PreprocessOptions(standardize=False))
        assert data.feature_names == ("color=red",)
        np.testing.assert_array_equal(data.X[:, 0], [1.0, 0.0, 0.0])

    def test_column_dropped_over_missing_threshold(self, tmp_path):
        rows = "\n".join(["%d,%d,%d" % (i, i % 5, i % 2 + 1) for i in range(8)])
        rows += "\n?,3,2\n?,4,1"
        path = write(tmp_path, "a,b,y\n" + rows + "\n")
        data = preprocess(load_csv(path, "y"))  # a is 20% missing
        assert "a" not in data.feature_names
        assert data.n == 10

    def test_rows_dropped_after_columns(self, tmp_path):
        # b has one missing cell (10% <= threshold): column kept, row dropped
        rows = "\n".join(["%d,%d,%d" % (i, i % 3, i % 2 + 1) for i in range(9)])
        rows += "\n5,NA,2"
        path = write(tmp_path, "a,b,y\n" + rows + "\n")
        data = preprocess(load_csv(path, "y"))
        assert data.n == 9
        assert data.feature_names == ("a", "b")

    def test_constant_column_dropped_with_warning(self, tmp_path):
        path = write(tmp_path, "a,b,y\n7,1,1\n7,2,2\n7,3,1\n")
        with pytest.warns(PreprocessWarning, match="constant column 'a'"):
            data = preprocess(load_csv(path, "y"))
        assert data.feature_names == ("b",)

    def test_labels_remapped_contiguously(self, tmp_path):
        path = write(tmp_path, "a,y\n1,3\n2,5\n3,8\n4,3\n")
        data = preprocess(load_csv(path, "y"))
        assert sorted(set(data.y.tolist())) == [1, 2, 3]
        assert data.m == 2
        assert data.y.tolist() == [1, 2, 3, 1]

    def test_single_label_value_rejected(self, tmp_path):
        path = write(tmp_path, "a,y\n1,1\n2,1\n")
        with pytest.raises(ValueError, match="single distinct value"):
            preprocess(load_csv(path, "y"))

    def test_all_rows_dropped_rejected(self, tmp_path):
        path = write(tmp_path, "a,b,y\n?,1,1\n2,?,2\n")
        opts = PreprocessOptions(missing_threshold=0.6)
        with pytest.raises(ValueError, match="every row"):
            preprocess(load_csv(path, "y"), opts)

    def test_standardization_idempotent(self, tmp_path, rng):
        X = rng.standard_normal((40, 3))
        y = rng.integers(1, 4, size=40)
        y[:3] = [1, 2, 3]
        data = Dataset(
            X=(X - X.mean(0)) / X.std(0),
            y=y,
            feature_names=("a", "b", "c"),
        )
        path = tmp_path / "fix.csv"
        dataset_to_csv(data, path)
        again = preprocess(load_csv(path, "y"))
        assert np.max(np.abs(again.X - data.X)) <= 1e-9

    def test_drop_columns_option(self, tmp_path):
        path = write(tmp_path, "a,b,y\n1,4,1\n2,5,2\n3,6,1\n")
        data = preprocess(load_csv(path, "y"), PreprocessOptions(drop_columns=("b",)))
        assert data.feature_names == ("a",)

    def test_unknown_drop_column_rejected(self, tmp_path):
        path = write(tmp_path, "a,y\n1,1\n2,2\n")
        with pytest.raises(ValueError, match="drop_columns"):
            preprocess(load_csv(path, "y"), PreprocessOptions(drop_columns=("zz",)))

    def test_categorical_without_dummies_rejected(self, tmp_path):
        path = write(tmp_path, "a,y\nred,1\nblue,2\n")
        opts = PreprocessOptions(dummy_encode=False)
        with pytest.raises(ValueError, match="categorical"):
            preprocess(load_csv(path, "y"), opts)

    def test_threshold_validation(self):
        with pytest.raises(ValueError):
            PreprocessOptions(missing_threshold=1.5)


class TestEncodeLabels:
    def make(self, y, p=1):
        y = np.asarray(y)
        X = np.zeros((y.size, p))
        return Dataset(X=X, y=y, feature_names=tuple(f"x{i}" for i in range(p)))

    def test_middle_class_rows(self):
        data = self.make([2], p=1)
        data = self.make([2, 4, 1, 3])  # m = 3
        enc = encode_labels(data, "forward")
        np.testing.assert_array_equal(enc.delta[0], [0, 1, 0])
        np.testing.assert_array_equal(enc.psi[0], [-1, 1, 0])

    def test_top_class_all_minus_ones(self):
        data = self.make([4, 1, 2, 3])  # m = 3; first sample is the top class
        enc = encode_labels(data, "forward")
        np.testing.assert_array_equal(enc.psi[0], [-1, -1, -1])
        assert np.abs(enc.psi[0]).sum() == 3

    def test_backward_is_forward_of_reversed(self):
        data = self.make([1, 4, 2, 3])  # m+1 = 4
        back = encode_labels(data, "backward")
        reversed_data = self.make([4, 1, 3, 2])
        fwd = encode_labels(reversed_data, "forward")
        np.testing.assert_array_equal(back.delta, fwd.delta)
        np.testing.assert_array_equal(back.psi, fwd.psi)

    def test_psi_row_structure(self, rng):
        y = rng.integers(1, 6, size=100)
        y[:5] = [1, 2, 3, 4, 5]
        data = self.make(y)
        enc = encode_labels(data, "forward")
        m = data.m
        for i in range(100):
            row = enc.psi[i]
            assert np.abs(row).sum() == min(y[i], m)
            nz = np.flatnonzero(row)
            if y[i] <= m:
                # a run of -1 then a single +1 at the label position
                assert row[y[i] - 1] == 1
                assert np.all(row[: y[i] - 1] == -1)
            else:
                assert np.all(row[nz] == -1)

    def test_delta_matches_labels(self, rng):
        y = rng.integers(1, 5, size=60)
        y[:4] = [1, 2, 3, 4]
        data = self.make(y)
        enc = encode_labels(data, "forward")
        for k in range(1, data.m + 1):
            np.testing.assert_array_equal(enc.delta[:, k - 1], (y == k).astype(int))

    def test_rejects_unknown_direction(self):
        data = self.make([1, 2])
        with pytest.raises(ValueError, match="direction"):
            encode_labels(data, "sideways")


class TestDatasetValidation:
    def test_label_floor(self):
        with pytest.raises(ValueError, match="start at 1"):
            Dataset(X=np.zeros((2, 1)), y=np.array([0, 1]), feature_names=("a",))

    def test_shape_mismatch(self):
        with pytest.raises(ValueError, match="row counts"):
            Dataset(X=np.zeros((2, 1)), y=np.array([1, 2, 1]), feature_names=("a",))

    def test_immutability(self):
        data = Dataset(X=np.zeros((2, 1)), y=np.array([1, 2]), feature_names=("a",))
        with pytest.raises(ValueError):
            data.X[0, 0] = 5.0
