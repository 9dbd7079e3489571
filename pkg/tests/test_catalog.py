import numpy as np
import pytest

from mrprior import (
    ApplicabilityError,
    InputError,
    MrSpec,
    apply_mr,
    build_pairs,
    load_catalog,
    pair_from_files,
)

from conftest import make_dataset, random_dataset


def ibk_row():
    return make_dataset(
        {
            "att1": [45, 12],
            "att2": [16, 99],
            "att3": [3, 7],
            "att4": [38, 4],
            "profit": ["0", "2"],
        },
        class_name="profit",
    )


class TestTransforms:
    def test_identity(self):
        d = ibk_row()
        out = apply_mr(MrSpec("M", "id", "identity"), d)
        assert out.rows == d.rows
        assert out.attributes == d.attributes

    def test_permute_attributes_reverse(self):
        d = ibk_row()
        mr = MrSpec("M", "rev", "permute_attributes", {"perm": "3,2,1,0"})
        out = apply_mr(mr, d)
        assert out.rows[0] == (38.0, 3.0, 16.0, 45.0, "0")
        assert [a.name for a in out.attributes] == ["att4", "att3", "att2", "att1", "profit"]
        assert out.class_index == 4

    def test_permute_attributes_seeded(self):
        d = ibk_row()
        mr = MrSpec("M", "shuffle", "permute_attributes", seed=5)
        out1, out2 = apply_mr(mr, d), apply_mr(mr, d)
        assert out1.rows == out2.rows
        assert sorted(a.name for a in out1.attributes) == sorted(a.name for a in d.attributes)

    def test_permute_attributes_bad_perm(self):
        mr = MrSpec("M", "p", "permute_attributes", {"perm": "0,0,1,2"})
        with pytest.raises(ApplicabilityError):
            apply_mr(mr, ibk_row())

    def test_permute_instances_preserves_multiset(self):
        d = random_dataset(np.random.default_rng(0), n_rows=20)
        out = apply_mr(MrSpec("M", "p", "permute_instances", seed=3), d)
        assert sorted(map(repr, out.rows)) == sorted(map(repr, d.rows))
        assert out.rows != d.rows

    def test_affine_example(self):
        d = make_dataset({"x": [1, 2, 3]})
        out = apply_mr(MrSpec("M", "a", "affine_numeric", {"scale": 2.0, "shift": 1.0}), d)
        assert [r[0] for r in out.rows] == [3.0, 5.0, 7.0]

    def test_affine_selected_columns(self):
        d = make_dataset({"x": [1.0], "y": [10.0]})
        out = apply_mr(
            MrSpec("M", "a", "affine_numeric", {"scale": 3.0, "columns": "y"}), d
        )
        assert out.rows[0] == (1.0, 30.0)

    def test_affine_skips_missing(self):
        d = make_dataset({"x": [1.0, None]})
        out = apply_mr(MrSpec("M", "a", "affine_numeric", {"scale": 2.0}), d)
        assert out.rows[1][0] is None

    def test_affine_rejects_nominal_column(self):
        d = ibk_row()
        mr = MrSpec("M", "a", "affine_numeric", {"scale": 2.0, "columns": "profit"})
        with pytest.raises(ApplicabilityError):
            apply_mr(mr, d)

    def test_add_uninformative_numeric(self):
        d = ibk_row()
        out = apply_mr(
            MrSpec("M", "u", "add_uninformative_attribute", {"value": "7"}), d
        )
        assert len(out.attributes) == 6
        assert out.attributes[4].name == "uninformative"
        assert out.attributes[4].is_numeric
        assert all(r[4] == 7.0 for r in out.rows)
        assert out.class_index == 5
        assert out.attributes[5].name == "profit"

    def test_add_uninformative_nominal(self):
        d = ibk_row()
        out = apply_mr(
            MrSpec("M", "u", "add_uninformative_attribute", {"value": "blue"}), d
        )
        assert out.attributes[4].values == ("blue",)

    def test_add_informative_maps_class(self):
        d = ibk_row()
        mr = MrSpec(
            "M", "i", "add_informative_attribute", {"map": "0:1,2:2,1:3,3:4,4:5"}
        )
        out = apply_mr(mr, d)
        assert out.attributes[4].name == "informative"
        assert out.attributes[4].is_numeric
        assert [r[4] for r in out.rows] == [1.0, 2.0]

    def test_add_informative_requires_total_map(self):
        d = ibk_row()
        mr = MrSpec("M", "i", "add_informative_attribute", {"map": "0:1"})
        with pytest.raises(ApplicabilityError):
            apply_mr(mr, d)

    def test_duplicate_rounds_half_up(self):
        d = random_dataset(np.random.default_rng(1), n_rows=10)
        out = apply_mr(
            MrSpec("M", "d", "duplicate_instances", {"fraction": 0.5}, seed=2), d
        )
        assert out.n_rows == 15
        # the added rows all exist in the source
        source = set(map(repr, d.rows))
        assert all(repr(r) in source for r in out.rows[10:])

    def test_duplicate_fraction_0_05_rounds(self):
        d = random_dataset(np.random.default_rng(2), n_rows=10)
        out = apply_mr(
            MrSpec("M", "d", "duplicate_instances", {"fraction": 0.05}, seed=2), d
        )
        assert out.n_rows == 11  # 0.5 rounds up

    def test_remove_instances(self):
        d = random_dataset(np.random.default_rng(3), n_rows=20)
        out = apply_mr(
            MrSpec("M", "r", "remove_instances", {"fraction": 0.25}, seed=9), d
        )
        assert out.n_rows == 15
        source = list(map(repr, d.rows))
        for row in out.rows:
            source.remove(repr(row))  # every kept row really came from the source

    def test_remove_class(self):
        d = ibk_row()
        out = apply_mr(MrSpec("M", "rc", "remove_class", {"label": "0"}), d)
        assert all(r[out.class_index] != "0" for r in out.rows)
        assert out.n_rows == 1
        assert "0" not in out.attributes[out.class_index].values

    def test_remove_class_absent_label(self):
        d = ibk_row()
        with pytest.raises(ApplicabilityError):
            apply_mr(MrSpec("M", "rc", "remove_class", {"label": "zz"}), d)

    def test_relabel_classes(self):
        d = make_dataset({"x": [1, 2], "cls": ["a", "b"]}, class_name="cls")
        out = apply_mr(MrSpec("M", "rl", "relabel_classes", {"map": "a:b,b:a"}), d)
        assert [r[1] for r in out.rows] == ["b", "a"]
        assert out.attributes[1].values == ("a", "b")

    def test_relabel_requires_permutation(self):
        d = make_dataset({"x": [1, 2], "cls": ["a", "b"]}, class_name="cls")
        with pytest.raises(ApplicabilityError):
            apply_mr(MrSpec("M", "rl", "relabel_classes", {"map": "a:a,b:a"}), d)

    def test_add_data_points_within_ranges(self):
        d = ibk_row()
        out = apply_mr(MrSpec("M", "ad", "add_data_points", {"count": 50}, seed=4), d)
        assert out.n_rows == 52
        for row in out.rows[2:]:
            assert 12.0 <= row[0] <= 45.0
            assert 16.0 <= row[1] <= 99.0
            assert row[4] in ("0", "2", "1", "3", "4")

    def test_seeded_transforms_are_deterministic(self):
        d = random_dataset(np.random.default_rng(4), n_rows=30)
        for transform, params in [
            ("permute_instances", {}),
            ("duplicate_instances", {"fraction": 0.3}),
            ("remove_instances", {"fraction": 0.3}),
            ("add_data_points", {"count": 10}),
        ]:
            mr = MrSpec("M", transform, transform, params, seed=77)
            assert apply_mr(mr, d).rows == apply_mr(mr, d).rows

    def test_seed_changes_output(self):
        d = random_dataset(np.random.default_rng(5), n_rows=30)
        a = apply_mr(MrSpec("M", "p", "permute_instances", seed=1), d)
        b = apply_mr(MrSpec("M", "p", "permute_instances", seed=2), d)
        assert a.rows != b.rows

    def test_class_required(self):
        d = make_dataset({"x": [1, 2]})
        for transform, params in [
            ("remove_class", {"label": "a"}),
            ("relabel_classes", {"map": "a:a"}),
            ("add_informative_attribute", {"map": "a:1"}),
        ]:
            with pytest.raises(ApplicabilityError):
                apply_mr(MrSpec("M", "t", transform, params), d)

    def test_missing_seed_rejected(self):
        d = make_dataset({"x": [1, 2]})
        with pytest.raises(InputError):
            apply_mr(MrSpec("M", "p", "permute_instances"), d)

    def test_unknown_transform_rejected(self):
        with pytest.raises(InputError):
            MrSpec("M", "x", "frobnicate")


CATALOG_OK = """\
# example catalog
MR1 "Keep as is"      identity
MR2 "Reverse columns" permute_attributes perm=3,2,1,0
MR3 "Shuffle rows"    permute_instances seed=11
MR4 "Double"          affine_numeric scale=2 shift=0
MR5 "Add noise rows"  add_data_points count=5 seed=3
"""


class TestCatalogFile:
    def test_parses_in_order(self, tmp_path):
        p = tmp_path / "cat.txt"
        p.write_text(CATALOG_OK)
        specs = load_catalog(str(p))
        assert [s.id for s in specs] == ["MR1", "MR2", "MR3", "MR4", "MR5"]
        assert specs[1].name == "Reverse columns"
        assert specs[3].params == {"scale": 2.0, "shift": 0.0}
        assert specs[4].seed == 3

    def test_duplicate_id_cites_line(self, tmp_path):
        p = tmp_path / "cat.txt"
        p.write_text("MR1 a identity\nMR1 b identity\n")
        with pytest.raises(InputError, match="line 2"):
            load_catalog(str(p))

    def test_unknown_transform_cites_line(self, tmp_path):
        p = tmp_path / "cat.txt"
        p.write_text("MR1 a identity\nMR2 b warp\n")
        with pytest.raises(InputError, match="line 2"):
            load_catalog(str(p))

    def test_missing_seed_cites_line(self, tmp_path):
        p = tmp_path / "cat.txt"
        p.write_text("MR1 a permute_instances\n")
        with pytest.raises(InputError, match="line 1"):
            load_catalog(str(p))

    def test_zero_scale_rejected(self, tmp_path):
        p = tmp_path / "cat.txt"
        p.write_text("MR1 a affine_numeric scale=0\n")
        with pytest.raises(InputError, match="line 1"):
            load_catalog(str(p))

    def test_fraction_out_of_range(self, tmp_path):
        p = tmp_path / "cat.txt"
        p.write_text("MR1 a remove_instances fraction=1.5 seed=1\n")
        with pytest.raises(InputError, match="line 1"):
            load_catalog(str(p))

    def test_short_line_rejected(self, tmp_path):
        p = tmp_path / "cat.txt"
        p.write_text("MR1 identity\n")
        with pytest.raises(InputError, match="line 1"):
            load_catalog(str(p))

    def test_empty_catalog_rejected(self, tmp_path):
        p = tmp_path / "cat.txt"
        p.write_text("# nothing here\n")
        with pytest.raises(InputError):
            load_catalog(str(p))


class TestPairs:
    def test_build_pairs_order_and_recomputability(self, tmp_path):
        p = tmp_path / "cat.txt"
        p.write_text(CATALOG_OK)
        d = ibk_row()
        pairs = build_pairs(load_catalog(str(p)), d)
        assert [pair.mr.id for pair in pairs] == ["MR1", "MR2", "MR3", "MR4", "MR5"]
        assert all(pair.recomputable for pair in pairs)
        assert all(pair.source is d for pair in pairs)
        # applying again reproduces each follow-up
        for pair in pairs:
            assert apply_mr(pair.mr, d).rows == pair.followup.rows

    def test_build_pairs_collects_failures(self, tmp_path):
        p = tmp_path / "cat.txt"
        p.write_text('MR1 a identity\nMR2 b remove_class label=zz\n')
        with pytest.raises(ApplicabilityError, match="MR2"):
            build_pairs(load_catalog(str(p)), ibk_row())

    def test_pair_from_files(self):
        d = ibk_row()
        f = apply_mr(MrSpec("X", "x", "identity"), d)
        pair = pair_from_files("EXT1", "external pair", d, f)
        assert not pair.recomputable
        with pytest.raises(ApplicabilityError):
            apply_mr(pair.mr, d)
