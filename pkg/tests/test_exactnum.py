from fractions import Fraction

import pytest

from segrelab.exactnum import QQi, rat_parse, rat_str


def test_constructor_coerces_int_and_fraction():
    a = QQi(2, Fraction(1, 3))
    assert a.re == Fraction(2)
    assert a.im == Fraction(1, 3)


def test_coerce_accepts_int_fraction_and_qqi():
    assert QQi.coerce(5) == QQi(5)
    assert QQi.coerce(Fraction(-7, 2)) == QQi(Fraction(-7, 2))
    a = QQi(1, 2)
    assert QQi.coerce(a) is a


def test_field_operations():
    a = QQi(1, 2)
    b = QQi(3, -1)
    assert a + b == QQi(4, 1)
    assert a - b == QQi(-2, 3)
    # (1+2i)(3-i) = 3 - i + 6i - 2i^2 = 5 + 5i
    assert a * b == QQi(5, 5)
    assert a / b == a * (1 / b)
    assert (a / b) * b == a


def test_reciprocal_and_division_by_zero():
    a = QQi(Fraction(1, 2), Fraction(-3, 4))
    assert a * (1 / a) == QQi(1)
    with pytest.raises(ZeroDivisionError):
        1 / QQi(0)


def test_powers():
    i = QQi(0, 1)
    assert i ** 2 == QQi(-1)
    assert i ** 3 == QQi(0, -1)
    assert i ** 0 == QQi(1)
    assert (QQi(1, 1) ** 2) == QQi(0, 2)
    with pytest.raises(ValueError):
        QQi(2) ** -1


def test_conjugate_and_abs2():
    a = QQi(Fraction(3, 5), Fraction(-4, 5))
    assert a.conjugate() == QQi(Fraction(3, 5), Fraction(4, 5))
    assert a.abs2() == Fraction(9 + 16, 25)
    assert a * a.conjugate() == QQi(a.abs2())


def test_predicates():
    assert QQi(0).is_zero()
    assert QQi(1).is_one()
    assert QQi(2, 0).is_real()
    assert not QQi(0, 1).is_real()


def test_hash_and_equality_with_plain_numbers():
    assert QQi(2) == 2
    assert QQi(Fraction(1, 2)) == Fraction(1, 2)
    assert hash(QQi(2)) == hash(QQi(2, 0))
    assert len({QQi(1, 1), QQi(1, 1), QQi(1)}) == 2


def test_immutability():
    a = QQi(1)
    with pytest.raises(AttributeError):
        a.re = Fraction(2)


def test_to_complex():
    assert QQi(Fraction(1, 2), -2).to_complex() == 0.5 - 2j


def test_str_round_trip_through_rat_parse():
    q = Fraction(-7, 3)
    assert rat_parse(rat_str(q)) == q
    assert rat_parse("5") == Fraction(5)
    assert rat_parse(Fraction(2, 9)) == Fraction(2, 9)


def test_str_forms():
    assert str(QQi(0)) == "0"
    assert "i" in str(QQi(0, 1))
    assert "i" not in str(QQi(3))
