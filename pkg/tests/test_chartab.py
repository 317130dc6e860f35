import json
from math import gcd

import pytest

from torsionunits import chartab
from torsionunits.chartab import (TableError, bundled_fusion_document,
                                  bundled_names, bundled_table, load_fusion,
                                  load_table, power_class)
from torsionunits.cyclotomic import galois


def all_tables():
    return {nm: bundled_table(nm) for nm in bundled_names()}


TABLES = all_tables()


def s3_doc():
    return json.loads(json.dumps({
        "group_name": "S3", "order": 6, "exponent": 6,
        "classes": [
            {"name": "1a", "order": 1, "size": 1,
             "power_map": {"2": "1a", "3": "1a"}},
            {"name": "2a", "order": 2, "size": 3,
             "power_map": {"2": "1a", "3": "2a"}},
            {"name": "3a", "order": 3, "size": 2,
             "power_map": {"2": "3a", "3": "1a"}},
        ],
        "characters": [
            {"name": "X1", "degree": 1, "values": ["1", "1", "1"]},
            {"name": "X2", "degree": 1, "values": ["1", "-1", "1"]},
            {"name": "X3", "degree": 2, "values": ["2", "0", "-1"]},
        ],
    }))


def test_bundled_corpus_loads():
    assert len(TABLES) == 16
    for nm, t in TABLES.items():
        assert t.group_name == nm
        assert t.classes[0].element_order == 1
        assert sum(c.size for c in t.classes) == t.order


def test_bundled_name_aliases():
    assert bundled_table("s6").group_name == "S6"
    assert bundled_table("psl_2_16").group_name == "PSL(2,16)"
    with pytest.raises(TableError):
        bundled_table("M11")


def test_s3_document():
    t = load_table(s3_doc())
    assert [c.element_order for c in t.classes] == [1, 2, 3]
    assert sorted(ch.degree for ch in t.characters) == [1, 1, 2]


def test_rejects_bad_size_sum():
    doc = s3_doc()
    doc["classes"][1]["size"] = 2
    with pytest.raises(TableError, match="class sizes"):
        load_table(doc)


def test_rejects_degree_mismatch():
    doc = s3_doc()
    doc["characters"][2]["values"][0] = "3"
    with pytest.raises(TableError, match="degree"):
        load_table(doc)


def test_rejects_broken_orthogonality():
    doc = s3_doc()
    doc["characters"][1]["values"] = ["1", "1", "-1"]
    # still degree-consistent at the identity but rows no longer orthogonal
    with pytest.raises(TableError, match="orthogonality"):
        load_table(doc)


def test_rejects_bad_power_map_order():
    doc = s3_doc()
    doc["classes"][2]["power_map"]["3"] = "2a"
    with pytest.raises(TableError, match="power map"):
        load_table(doc)


def test_rejects_incomplete_power_map():
    doc = s3_doc()
    del doc["classes"][0]["power_map"]["3"]
    with pytest.raises(TableError, match="power map"):
        load_table(doc)


def test_rejects_nonsquare():
    doc = s3_doc()
    doc["characters"].pop()
    with pytest.raises(TableError, match="square"):
        load_table(doc)


def test_rejects_galois_inconsistency():
    # point the squaring map of an order-3 class at the class itself:
    # order arithmetic still passes, the twisted values do not
    raw = json.loads(chartab._bundled_text("c6"))
    for c in raw["classes"]:
        if c["name"] == "3a":
            c["power_map"]["2"] = "3a"
    with pytest.raises(TableError, match="Galois"):
        load_table(raw)


def test_power_class_identity_cases():
    for t in TABLES.values():
        for i in range(len(t.classes)):
            assert power_class(t, i, 1) == i
            assert power_class(t, i, 0) == 0
            assert power_class(t, i, t.classes[i].element_order) == 0


def test_power_class_spec_examples():
    s3 = TABLES["S3"]
    assert power_class(s3, s3.class_index("3a"), 3) == 0
    s6 = TABLES["S6"]
    for nm in ("6a", "6b"):
        j = power_class(s6, s6.class_index(nm), 2)
        assert s6.classes[j].element_order == 3


def test_power_class_order_arithmetic():
    for t in TABLES.values():
        for i, c in enumerate(t.classes):
            o = c.element_order
            for m in range(2 * o + 2):
                j = power_class(t, i, m)
                assert t.classes[j].element_order == o // gcd(o, m)


def test_power_class_galois_values():
    # the returned class must carry the Galois-twisted character values,
    # including residues only reachable through the fallback (C6: k = 5)
    for t in TABLES.values():
        for i, c in enumerate(t.classes):
            o = c.element_order
            for k in range(1, o):
                if gcd(k, o) != 1:
                    continue
                j = power_class(t, i, k)
                for ch in t.characters:
                    assert ch.values[j] == galois(ch.values[i], k), \
                        (t.group_name, c.name, k)


def test_c6_inverse_class_via_fallback():
    c6 = TABLES["C6"]
    i = c6.class_index("6a")
    j = power_class(c6, i, 5)
    assert c6.classes[j].name == "6b"


def test_fusion_bundled():
    fus = load_fusion(TABLES["SL(2,3)"], TABLES["A4"],
                      bundled_fusion_document())
    assert fus.kernel_order == 2
    assert fus.kernel_is_p_group == 2
    assert fus.class_map[0] == 0


def test_fusion_rejects_identity_violation():
    doc = bundled_fusion_document()
    doc["map"]["1a"] = "2a"
    with pytest.raises(TableError, match="identity"):
        load_fusion(TABLES["SL(2,3)"], TABLES["A4"], doc)


def test_fusion_rejects_bad_sizes():
    doc = bundled_fusion_document()
    # send the central involution to the image 2a instead of collapsing it
    doc["map"]["2a"] = "2a"
    with pytest.raises(TableError, match="sizes"):
        load_fusion(TABLES["SL(2,3)"], TABLES["A4"], doc)


def test_fusion_rejects_wrong_kernel_prime():
    doc = bundled_fusion_document()
    doc["kernel_is_p_group"] = 3
    with pytest.raises(TableError, match="power of 3"):
        load_fusion(TABLES["SL(2,3)"], TABLES["A4"], doc)


def test_brauer_block_classes_are_regular():
    p16 = TABLES["PSL(2,16)"]
    blk = p16.brauer[2]
    assert all(p16.classes[i].element_order % 2 == 1
               for i in blk.class_indices)
    assert len(blk.characters) == 16


def test_brauer_rejects_irregular_class_list():
    raw = json.loads(chartab._bundled_text("psl_2_16"))
    raw["brauer"]["2"]["classes"][0] = "2a"
    with pytest.raises(TableError, match="regular"):
        load_table(raw)


def test_classes_of_order():
    s6 = TABLES["S6"]
    assert [s6.classes[i].name for i in s6.classes_of_order(2)] == \
        ["2a", "2b", "2c"]
    assert s6.element_orders() == [1, 2, 3, 4, 5, 6]
