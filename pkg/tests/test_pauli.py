import pytest
from hypothesis import given
from hypothesis import strategies as st

from ebcap.bellalg import BellLabel
from ebcap.pauli import (
    CodeFileError,
    PauliString,
    StabilizerCode,
    builtin_cat,
    builtin_code,
    builtin_shor9,
    commutes,
    gf2_rank,
    logical_class,
    parse_code_file,
    parse_pauli,
    render_code,
    syndrome,
    uses_schedule,
    validate_code,
)

SHOR9_TEXT = """\
# nine-qubit Shor code, generators in measurement order
name shor9
n 9
g ZZIIIIIII
g IZZIIIIII
g IIIZZIIII
g IIIIZZIII
g XXXXXXIII
g IIIIIIZZI
g IIIIIIIZZ
g IIIXXXXXX
X ZZZZZZZZZ   # logical X
Z XXXXXXXXX
"""


def paulis(n):
    return st.tuples(st.integers(0, (1 << n) - 1), st.integers(0, (1 << n) - 1)).map(
        lambda xz: PauliString(n, *xz)
    )


def test_parse_pauli():
    p = parse_pauli("ZZIIIIIII", 9)
    assert p.bit_strings() == ("000000000", "110000000")
    assert parse_pauli("IIIIIIIII").weight == 0
    assert parse_pauli("XYZ", 3).bit_strings() == ("110", "011")
    assert str(parse_pauli("XYZI")) == "XYZI"
    with pytest.raises(ValueError):
        parse_pauli("XYZ", 4)
    with pytest.raises(ValueError):
        parse_pauli("XQZ")


def test_commutes_examples():
    assert not commutes(parse_pauli("X"), parse_pauli("Z"))
    assert commutes(parse_pauli("XI"), parse_pauli("IZ"))
    assert not commutes(parse_pauli("Z" * 9), parse_pauli("X" * 9))
    with pytest.raises(ValueError):
        commutes(parse_pauli("X"), parse_pauli("XX"))


@given(paulis(5), paulis(5))
def test_commutes_symmetric(p, q):
    assert commutes(p, q) == commutes(q, p)
    assert commutes(p, p)
    assert commutes(p, PauliString.identity(5))


def test_gf2_rank():
    assert gf2_rank([0b011, 0b110, 0b101]) == 2
    assert gf2_rank([0b001, 0b010, 0b100]) == 3
    assert gf2_rank([0, 0]) == 0


def test_builtins_validate():
    assert validate_code(builtin_shor9()) is None
    for n in range(2, 10):
        assert validate_code(builtin_cat(n)) is None


def test_cat_generators_and_logicals():
    assert [str(g) for g in builtin_cat(3).generators] == ["ZZI", "IZZ"]
    assert str(builtin_cat(4).logical_z) == "ZZZI"
    assert str(builtin_cat(5).logical_z) == "ZZZZZ"
    assert str(builtin_cat(4).logical_x) == "XXXX"
    with pytest.raises(ValueError):
        builtin_cat(1)


def test_shor_generators():
    code = builtin_shor9()
    assert str(code.generators[4]) == "XXXXXXIII"
    assert str(code.logical_x) == "Z" * 9


def test_validate_reports_problems():
    cat = builtin_cat(3)
    dup = StabilizerCode(3, (cat.generators[0], cat.generators[0]), cat.logical_x, cat.logical_z)
    assert "independent" in validate_code(dup)
    same = StabilizerCode(3, cat.generators, cat.logical_x, cat.logical_x)
    assert validate_code(same) is not None
    assert "commute" in validate_code(same)
    anti = StabilizerCode(2, (parse_pauli("XX"),), parse_pauli("ZI"), parse_pauli("ZZ"))
    assert "logical X anticommutes" in validate_code(anti)


def test_syndrome_examples():
    code = builtin_shor9()
    assert syndrome(PauliString.identity(9), code) == (0,) * 8
    assert "".join(map(str, syndrome(parse_pauli("XIIIIIIII"), code))) == "10000000"
    assert "".join(map(str, syndrome(parse_pauli("ZIIIIIIII"), code))) == "00001000"


@given(paulis(9), paulis(9))
def test_syndrome_linear(p, q):
    code = builtin_shor9()
    combined = tuple(a ^ b for a, b in zip(syndrome(p, code), syndrome(q, code)))
    assert syndrome(p * q, code) == combined


def test_logical_class_examples():
    code = builtin_shor9()
    assert logical_class(PauliString.identity(9), code) is BellLabel.PHI_PLUS
    assert logical_class(parse_pauli("Z" * 9), code) is BellLabel.PSI_PLUS
    assert logical_class(parse_pauli("X" * 9), code) is BellLabel.PHI_MINUS
    assert logical_class(parse_pauli("Y" * 9), code) is BellLabel.PSI_MINUS


@given(st.sampled_from(["I", "X", "Y", "Z"]), st.sampled_from(["I", "X", "Y", "Z"]), st.integers(0, 7))
def test_logical_class_homomorphism(a, b, gen_index):
    # elements of the normaliser: logical Paulis times a stabilizer element
    code = builtin_shor9()
    logical = {"I": PauliString.identity(9), "X": code.logical_x, "Z": code.logical_z}
    logical["Y"] = code.logical_x * code.logical_z
    p = logical[a] * code.generators[gen_index]
    q = logical[b]
    lhs = logical_class(p * q, code)
    rhs = BellLabel(logical_class(p, code) ^ logical_class(q, code))
    assert lhs is rhs


def test_uses_schedule():
    assert uses_schedule(builtin_shor9()) == (2, 3, 5, 6, 6, 8, 9, 9)
    assert uses_schedule(builtin_cat(6)) == (2, 3, 4, 5, 6)
    code = StabilizerCode(3, (parse_pauli("ZIZ"), parse_pauli("ZZI")), parse_pauli("XXX"), parse_pauli("ZZZ"))
    assert uses_schedule(code)[0] == 3
    for c in (builtin_shor9(), builtin_cat(7)):
        q = uses_schedule(c)
        assert list(q) == sorted(q) and q[-1] == c.n


def test_parse_shor_file():
    assert parse_code_file(SHOR9_TEXT) == builtin_shor9()


@pytest.mark.parametrize("code", [builtin_shor9(), builtin_cat(4), builtin_cat(5)])
def test_render_round_trip(code):
    assert parse_code_file(render_code(code)) == code


def test_parse_errors():
    bad_len = SHOR9_TEXT.replace("g IIIIZZIII", "g IIIIZZII")
    with pytest.raises(CodeFileError) as exc:
        parse_code_file(bad_len)
    assert exc.value.line == 7
    no_logicals = "\n".join(l for l in SHOR9_TEXT.splitlines() if not l.startswith(("X", "Z")))
    with pytest.raises(CodeFileError, match="missing X/Z line"):
        parse_code_file(no_logicals)
    with pytest.raises(CodeFileError, match="'n' must precede"):
        parse_code_file("g ZZ\nn 2\n")
    with pytest.raises(CodeFileError, match="independent"):
        parse_code_file("n 3\ng ZZI\ng ZZI\nX XXX\nZ ZZZ\n")


def test_builtin_lookup():
    assert builtin_code("cat7").n == 7
    with pytest.raises(ValueError):
        builtin_code("steane")
