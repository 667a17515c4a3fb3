import pytest

from conftest import nx_isomorphic
from app.schemas.morphism_models import PpMorphism
from app.schemas.poset_models import Poset
from app.services.duality_service import duality_service
from app.services.poset_service import poset_service
from app.services.exceptions import FormatError
from app.services.quasivar_service import quasivar_service
from app.services.text_codec import text_codec

B2_TEXT = """
# 两个极大元的 V 形
poset 3
label 0 bottom
le 0 1
le 0 2
"""


def test_parse_poset(B2):
    p = text_codec.parse_poset(B2_TEXT)
    assert p.n == 3
    assert p.label(0) == "bottom"
    assert p.label(2) == "2"
    assert nx_isomorphic(p, B2)


def test_parse_poset_closes_transitively():
    p = text_codec.parse_poset("poset 3\nle 0 1\nle 1 2\n")
    assert p.le(0, 2)


def test_dump_poset_writes_covers(R):
    text = text_codec.dump_poset(Poset.chain(3))
    assert "le 0 1" in text and "le 1 2" in text
    assert "le 0 2" not in text
    assert text_codec.parse_poset(text_codec.dump_poset(R)) == R


@pytest.mark.parametrize("text, line_no", [
    ("graph 3\n", 1),
    ("poset 2\nle 0 5\n", 2),
    ("poset 2\n\nle 0 x\n", 3),
    ("poset 2\nfoo 1\n", 2),
    ("poset -1\n", 1),
])
def test_parse_poset_errors(text, line_no):
    with pytest.raises(FormatError) as info:
        text_codec.parse_poset(text)
    assert info.value.line_no == line_no


def test_parse_poset_rejects_cycles():
    with pytest.raises(FormatError, match="不是偏序"):
        text_codec.parse_poset("poset 2\nle 0 1\nle 1 0\n")
    assert text_codec.parse_poset("poset 2\nle 0 1\nle 1 0\n", check=False).n == 2


def test_parse_empty_input():
    with pytest.raises(FormatError):
        text_codec.parse_poset("# 只有注释\n")


def test_certificates(P, Q):
    f = PpMorphism(source=P, target=Q, map=(0, 1, 2, 3, 4))
    g = PpMorphism(source=P, target=Q, map=(0, 1, 2, 3, 1))
    text = text_codec.dump_certificates([f, g], sources=[0, 1])
    assert text.count("ppmap 5") == 2
    assert "source 1" in text
    assert text_codec.parse_certificates(text) == [(0, f.map), (1, g.map)]


def test_certificate_errors():
    with pytest.raises(FormatError):
        text_codec.parse_certificates("pair 0 0\n")
    with pytest.raises(FormatError) as info:
        text_codec.parse_certificates("ppmap 2\npair 0 0\npair 0 1\n")
    assert info.value.line_no == 3
    with pytest.raises(FormatError):
        text_codec.parse_certificates("ppmap 2\npair 0 0\n")


def test_algebra(R):
    a = duality_service.epsilon(R)
    parsed = text_codec.parse_algebra(text_codec.dump_algebra(a))
    assert parsed.size == a.size
    assert parsed.meet == a.meet and parsed.join == a.join and parsed.star == a.star
    assert parsed.element_names == a.element_names
    assert duality_service.is_p_algebra(parsed).ok


def test_algebra_errors():
    with pytest.raises(FormatError):
        text_codec.parse_algebra("palg 0\n")
    with pytest.raises(FormatError, match="meet"):
        text_codec.parse_algebra("palg 1\nstar 0 0\nzero 0\none 0\n")
    with pytest.raises(FormatError) as info:
        text_codec.parse_algebra("palg 1\nmeet 0 0 3\n")
    assert info.value.line_no == 2


def test_reduced_literal(reduced_q):
    base, family = text_codec.parse_reduced("reduced 3\nset 1,2\nset 3,2\n")
    assert base == (1, 2, 3)
    assert family == [(1, 2), (2, 3)]
    assert text_codec.dump_reduced(reduced_q.base, reduced_q.family) == "reduced 3\nset 1,2\nset 2,3\n"


def test_reduced_literal_renumbers_base():
    shrunk = quasivar_service.make_reduced((1, 4, 7), [(4, 7)])
    text = text_codec.dump_reduced(shrunk.base, shrunk.family)
    assert text == "reduced 3\nset 2,3\n"
    base, family = text_codec.parse_reduced(text)
    assert nx_isomorphic(quasivar_service.make_reduced(base, family).realized, shrunk.realized)


def test_reduced_literal_errors():
    with pytest.raises(FormatError):
        text_codec.parse_reduced("reduced 0\n")
    with pytest.raises(FormatError) as info:
        text_codec.parse_reduced("reduced 3\nset 1,4\n")
    assert info.value.line_no == 2


def test_dot(reduced_r):
    dot = text_codec.to_dot(reduced_r.realized, name="R")
    assert dot.startswith("digraph R {")
    assert 'label="{1,2}"' in dot
    assert "rank=max" in dot
    assert dot.count("->") == 9


def test_read_write(tmp_path, B2):
    path = tmp_path / "b2.poset"
    text_codec.write_text(path, text_codec.dump_poset(B2))
    assert text_codec.parse_poset(text_codec.read_text(path)) == B2


def test_dot_quotes_labels():
    p = text_codec.parse_poset('poset 2\nlabel 0 a"b\nlabel 1 c\\\nle 0 1\n')
    dot = text_codec.to_dot(p, name="quoted")
    assert 'label="a\\"b"' in dot
    assert 'label="c\\\\"' in dot


def test_union_labels_survive_round_trip(B2):
    union = poset_service.disjoint_union([B2, B2]).poset
    parsed = text_codec.parse_poset(text_codec.dump_poset(union))
    assert parsed.labels == union.labels
    assert parsed == union


def test_dump_poset_label_edge_cases():
    blank = Poset.from_pairs(2, [(0, 1)], labels=["", "top"])
    parsed = text_codec.parse_poset(text_codec.dump_poset(blank))
    assert parsed.labels == ("0", "top")
    with pytest.raises(FormatError, match="#"):
        text_codec.dump_poset(Poset.from_pairs(1, [], labels=["a#b"]))


def test_algebra_name_out_of_range(point):
    text = text_codec.dump_algebra(duality_service.epsilon(point))
    with pytest.raises(FormatError) as info:
        text_codec.parse_algebra(text + "name 99 x\n")
    assert info.value.line_no == len(text.splitlines()) + 1
