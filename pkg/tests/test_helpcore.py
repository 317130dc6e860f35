from fractions import Fraction

import pytest

from torsionunits.chartab import bundled_fusion_document, bundled_table, \
    load_fusion, power_class
from torsionunits.cyclotomic import Cyclotomic
from torsionunits.helpcore import (AffineForm, HelpError, HelpOptions,
                                   PAVector, PowerChain, build_system,
                                   candidate_classes, chi_of_power,
                                   multiplicity_form)

S3 = bundled_table("S3")
S6 = bundled_table("S6")
S7 = bundled_table("S7")
C2 = bundled_table("C2")
C6 = bundled_table("C6")
P16 = bundled_table("PSL(2,16)")


def names(table, indices):
    return [table.classes[i].name for i in indices]


def euler_phi(n):
    return sum(1 for k in range(1, n + 1)
               if __import__("math").gcd(k, n) == 1)


def test_candidate_classes():
    assert names(S6, candidate_classes(S6, 2)) == ["2a", "2b", "2c"]
    assert names(S3, candidate_classes(S3, 1)) == ["1a"]
    assert names(S3, candidate_classes(S3, 6)) == ["2a", "3a"]
    with pytest.raises(HelpError):
        candidate_classes(S3, 0)


def test_pavector_invariants():
    ok = PAVector.make(2, {1: -1, 2: 1, 3: 1})
    ok.validate(S6)
    assert ok.entry(1) == -1 and ok.entry(5) == 0
    assert ok.support() == (1, 2, 3)
    assert ok.as_tuple((1, 2, 3)) == (-1, 1, 1)
    with pytest.raises(HelpError, match="sum"):
        PAVector.make(2, {1: 1, 2: 1}).validate(S6)
    with pytest.raises(HelpError, match="order"):
        PAVector.make(2, {S6.class_index("3a"): 1}).validate(S6)
    with pytest.raises(HelpError, match="identity"):
        PAVector.make(2, {0: 1}).validate(S6)


def test_trivial_chain_levels():
    ch = PowerChain.trivial(S6, S6.class_index("6a"))
    assert ch.order == 6
    got = {e: names(S6, vec.support())[0] for e, vec in ch.levels}
    assert got[6] == "6a"
    assert S6.classes[S6.class_index(got[2])].element_order == 2
    assert S6.classes[S6.class_index(got[3])].element_order == 3
    assert ch.level(1).entries == ((0, 1),)
    with pytest.raises(HelpError, match="missing level"):
        PowerChain.of(6, {}).level(3)


def test_chain_compatibility_rejects_wrong_powers():
    i6a = S6.class_index("6a")
    sq = power_class(S6, i6a, 2)
    other3 = next(i for i in candidate_classes(S6, 3)
                  if S6.classes[i].element_order == 3 and i != sq)
    cube = power_class(S6, i6a, 3)
    with pytest.raises(HelpError, match="disagree"):
        PowerChain.of(6, {2: PAVector.indicator(S6, cube),
                          3: PAVector.indicator(S6, other3),
                          6: PAVector.indicator(S6, i6a)}, S6)


def test_affine_form_arithmetic():
    f = AffineForm(1, {0: Fraction(1, 2), 2: -1})
    g = AffineForm(-1, {0: Fraction(1, 2), 1: 3})
    s = f + g
    assert s.constant == 0
    assert s.coefficient(0) == 1 and s.coefficient(2) == -1
    assert (f - f).is_zero()
    assert (f * 2).evaluate((3, 0, 1)) == 2 + 3 - 2
    assert f.evaluate({0: 2, 1: 9, 2: 1}) == 1
    assert f.render(["a", "b", "c"]) == "1 + 1/2*eps(a) - eps(c)"
    assert AffineForm(0).render() == "0"
    assert not f.is_integral() and (f * 2).is_integral()


def test_chi_of_power_examples():
    ch = PowerChain.trivial(S6, S6.class_index("6a"))
    for chi in S6.characters:
        top = chi_of_power(S6, ch, chi, 6)
        assert isinstance(top, Cyclotomic)
        assert top.rational_value() == chi.degree
    chain2 = PowerChain.of(2, {})
    x3 = next(c for c in S6.characters if c.degree == 5 and
              c.values[1].rational_value() == -1)
    form = chi_of_power(S6, chain2, x3, 1)
    assert form.evaluate((-1, 1, 1)).rational_value() == 5
    assert form.evaluate((0, 0, 0)).is_zero
    with pytest.raises(HelpError, match="missing level"):
        chi_of_power(S6, PowerChain.of(6, {}), x3, 2)
    with pytest.raises(HelpError, match="divide"):
        chi_of_power(S6, chain2, x3, 4)


def test_involution_trivial_character():
    ch = PowerChain.trivial(C2, 1)
    mu0 = multiplicity_form(C2, C2.characters[0], 2, 0, ch)
    mu1 = multiplicity_form(C2, C2.characters[0], 2, 1, ch)
    assert mu0.evaluate((1,)) == 1
    assert mu1.evaluate((1,)) == 0


def test_s6_involution_diagonals():
    # the eleven (mult of +1, mult of -1) pairs for the tuple (-1,1,1),
    # rows keyed by (degree, profile on the three involution classes)
    chain = PowerChain.of(2, {})
    point = (-1, 1, 1)
    expected = {
        (1, (1, 1, 1)): (1, 0),
        (1, (-1, 1, -1)): (1, 0),
        (5, (-1, 1, 3)): (5, 0),
        (5, (1, 1, -3)): (1, 4),
        (5, (3, 1, -1)): (1, 4),
        (5, (-3, 1, 1)): (5, 0),
        (9, (-3, 1, -3)): (5, 4),
        (9, (3, 1, 3)): (5, 4),
        (10, (-2, -2, 2)): (6, 4),
        (10, (2, -2, -2)): (2, 8),
        (16, (0, 0, 0)): (8, 8),
    }
    seen = {}
    for chi in S6.characters:
        prof = tuple(int(chi.values[S6.class_index(n)].rational_value())
                     for n in ("2a", "2b", "2c"))
        pair = tuple(
            int(multiplicity_form(S6, chi, 2, l, chain).evaluate(point))
            for l in (0, 1))
        seen[(chi.degree, prof)] = pair
    assert seen == expected


def test_multiplicity_sum_is_degree_identically():
    cases = [
        (S6, PowerChain.trivial(S6, S6.class_index("6a"))),
        (C6, PowerChain.trivial(C6, C6.class_index("6a"))),
        (P16, PowerChain.of(6, {2: PAVector.indicator(P16, 1),
                                3: PAVector.indicator(P16, 2)}, P16)),
    ]
    for table, chain in cases:
        n = chain.order
        for chi in table.characters:
            total = AffineForm(0)
            for l in range(n):
                total = total + multiplicity_form(table, chi, n, l, chain)
            assert total == AffineForm(chi.degree), (table.group_name,
                                                     chi.name)


def test_galois_symmetry_of_rational_forms():
    # rational character table: mu_l depends only on gcd(l, n)
    for table, rep in ((S6, "6a"), (S7, "6a")):
        chain = PowerChain.trivial(table, table.class_index(rep))
        for chi in table.characters:
            mus = [multiplicity_form(table, chi, 6, l, chain)
                   for l in range(6)]
            assert mus[1] == mus[5]
            assert mus[2] == mus[4]


def test_trivial_character_reproduces_augmentation():
    chain = PowerChain.trivial(S6, S6.class_index("6a"))
    triv = next(c for c in S6.characters
                if all(v.rational_value() == 1 for v in c.values))
    mu0 = multiplicity_form(S6, triv, 6, 0, chain)
    k = len(candidate_classes(S6, 6))
    phi = Fraction(euler_phi(6), 6)
    assert mu0 == AffineForm(1 - phi, {j: phi for j in range(k)})


def s7_case_chain(level3_name):
    return PowerChain.of(6, {
        2: PAVector.indicator(S7, S7.class_index("2a")),
        3: PAVector.indicator(S7, S7.class_index(level3_name))}, S7)


def test_s7_order6_case_profiles():
    cand = candidate_classes(S7, 6)
    deg14 = [c for c in S7.characters if c.degree == 14]
    assert len(deg14) == 4
    p1 = (2, 2, 3, 2, 3, 2)
    p2 = (2, 1, 3, 4, 3, 1)
    cases = {"i": ("3b", {"2a": -2, "3a": 2, "3b": 1}),
             "ii": ("3a", {"2a": -2, "3a": 1, "3b": 2})}
    profs = {}
    for label, (lvl3, tup) in cases.items():
        chain = s7_case_chain(lvl3)
        point = [tup.get(S7.classes[i].name, 0) for i in cand]
        assert build_system(S7, 6, chain).check_point(point)
        for chi in deg14:
            profs[label, chi.name] = tuple(
                multiplicity_form(S7, chi, 6, l, chain).evaluate(point)
                for l in range(6))
    for label in cases:
        got = sorted(profs[label, c.name] for c in deg14)
        assert got == sorted([p1, p1, p2, p2]), label
    # the two character pairs swap their diagonals between the cases
    for chi in deg14:
        assert profs["i", chi.name] != profs["ii", chi.name]


def test_psl216_order6_profiles():
    i2, i3 = P16.class_index("2a"), P16.class_index("3a")
    chain = PowerChain.of(6, {2: PAVector.indicator(P16, i2),
                              3: PAVector.indicator(P16, i3)}, P16)
    cand = candidate_classes(P16, 6)
    assert names(P16, cand) == ["2a", "3a"]
    point = (4, -3)
    assert build_system(P16, 6, chain).check_point(point)
    st = next(c for c in P16.characters if c.degree == 16)
    prof = tuple(multiplicity_form(P16, st, 6, l, chain).evaluate(point)
                 for l in range(6))
    assert prof == (2, 2, 3, 4, 3, 2)
    # psi: the unique degree-17 character agreeing with 1 + St on classes
    # of order coprime to 3
    regular = [i for i, c in enumerate(P16.classes)
               if c.element_order % 3 != 0]
    psis = [c for c in P16.characters if c.degree == 17 and
            all(c.values[i] == st.values[i] + 1 for i in regular)]
    assert len(psis) == 1
    prof = tuple(multiplicity_form(P16, psis[0], 6, l, chain).evaluate(point)
                 for l in range(6))
    assert prof == (5, 4, 2, 0, 2, 4)


def test_brauer_requires_coprime_prime():
    blk = P16.brauer[2]
    ch = PowerChain.of(2, {})
    with pytest.raises(HelpError, match="coprime"):
        multiplicity_form(P16, blk.characters[0], 2, 0, ch, block=blk)


def test_indicator_chains_survive_full_system():
    for nm in ("S3", "C6", "D8", "Q8", "A4", "S6"):
        table = bundled_table(nm)
        for ci, cls in enumerate(table.classes):
            n = cls.element_order
            chain = PowerChain.trivial(table, ci)
            sys_ = build_system(table, n, chain)
            cand = candidate_classes(table, n)
            point = [1 if i == ci else 0 for i in cand]
            assert sys_.check_point(point), (nm, cls.name)


def test_build_system_order_one():
    sys_ = build_system(S6, 1, PowerChain.of(1, {}))
    assert sys_.num_vars == 1
    assert sys_.check_point((1,))
    assert not sys_.check_point((0,))
    assert not sys_.check_point((2,))


def test_build_system_admits_paper_s6_tuple():
    sys_ = build_system(S6, 2, PowerChain.of(2, {}))
    assert sys_.check_point((-1, 1, 1))
    for j in range(3):
        point = [0, 0, 0]
        point[j] = 1
        assert sys_.check_point(point)


def test_build_system_errors():
    with pytest.raises(HelpError, match="incomplete chain"):
        build_system(S6, 6, PowerChain.of(6, {}))
    with pytest.raises(HelpError, match="fusion"):
        build_system(S6, 2, PowerChain.of(2, {}),
                     HelpOptions(quotient_vector=PAVector.make(1, {0: 1})))
    with pytest.raises(HelpError, match="p-part"):
        build_system(S6, 2, PowerChain.of(2, {}), HelpOptions(p_part=True))


def test_fusion_and_p_part_families():
    sl = bundled_table("SL(2,3)")
    a4 = bundled_table("A4")
    fus = load_fusion(sl, a4, bundled_fusion_document())
    chain = PowerChain.of(4, {2: PAVector.indicator(sl, sl.class_index("2a"))},
                          sl)
    qv = PAVector.indicator(a4, a4.class_index("2a"))
    opts = HelpOptions(fusion=fus, quotient_vector=qv, p_part=True)
    sys_ = build_system(sl, 4, chain, opts)
    cand = candidate_classes(sl, 4)
    assert names(sl, cand) == ["2a", "4a"]
    assert sys_.check_point((0, 1))
    assert not sys_.check_point((1, 0))
    # image of the same order forbids the p-part family
    with pytest.raises(HelpError, match="strictly smaller"):
        build_system(sl, 2, PowerChain.of(2, {}),
                     HelpOptions(fusion=fus, quotient_vector=qv, p_part=True))


def test_dump_format():
    sys_ = build_system(C2, 2, PowerChain.of(2, {}))
    text = sys_.dump()
    assert text == sys_.dump()
    lines = text.strip().splitlines()
    assert lines[0] == "vars: 2a"
    assert len(lines) == 16
    assert sum(1 for ln in lines if ln.startswith("eq:")) == 1
    assert sum(1 for ln in lines if ln.startswith("ge:")) == 10
    assert sum(1 for ln in lines if ln.startswith("cong:")) == 4
    assert any("(mod 2)" in ln for ln in lines)
