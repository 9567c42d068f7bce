import io
import math

import numpy as np
import pytest

from tspbnb import (InvalidInstanceError, OracleSizeError, ParseError, Tour,
                    brute_force_optimum, generate, parse_tsplib, render_tsplib,
                    validate_tour)
from oracles import all_tours

SQUARE_TSP = """NAME: square
TYPE: TSP
DIMENSION: 4
EDGE_WEIGHT_TYPE: EUC_2D
NODE_COORD_SECTION
1 0.0 0.0
2 1.0 0.0
3 1.0 1.0
4 0.0 1.0
EOF
"""


def test_generate_deterministic():
    a = generate(4, seed=7)
    b = generate(4, seed=7)
    assert np.array_equal(a.coords, b.coords)


def test_generate_unit_square():
    inst = generate(50, seed=3)
    assert inst.coords.min() >= 0.0 and inst.coords.max() <= 1.0


def test_generate_too_small():
    with pytest.raises(InvalidInstanceError):
        generate(2, seed=0)


def test_generate_different_seeds_differ():
    assert not np.array_equal(generate(5, 0).coords, generate(5, 1).coords)


def test_costs_symmetric_nonnegative():
    inst = generate(9, seed=11)
    for i in range(inst.n):
        for j in range(inst.n):
            if i != j:
                assert inst.cost(i, j) == inst.cost(j, i) >= 0.0
    with pytest.raises(InvalidInstanceError):
        inst.cost(2, 2)


def test_parse_square():
    inst = parse_tsplib(SQUARE_TSP)
    assert inst.n == 4
    assert inst.name == "square"
    assert inst.cost(0, 1) == pytest.approx(1.0)
    assert inst.cost(0, 2) == pytest.approx(math.sqrt(2.0))


def test_parse_accepts_stream():
    inst = parse_tsplib(io.StringIO(SQUARE_TSP))
    assert inst.n == 4


def test_parse_truncated_coords():
    text = "DIMENSION: 3\nEDGE_WEIGHT_TYPE: EUC_2D\nNODE_COORD_SECTION\n1 0 0\n2 1 0\n"
    with pytest.raises(ParseError, match="line"):
        parse_tsplib(text)


def test_parse_unsupported_weight_type():
    with pytest.raises(ParseError, match="GEO"):
        parse_tsplib("DIMENSION: 3\nEDGE_WEIGHT_TYPE: GEO\n")


def test_parse_non_numeric_coordinate():
    text = "DIMENSION: 3\nEDGE_WEIGHT_TYPE: EUC_2D\nNODE_COORD_SECTION\n1 0 0\n2 x 0\n3 1 1\nEOF\n"
    with pytest.raises(ParseError, match="line 5"):
        parse_tsplib(text)


def test_parse_missing_sections():
    with pytest.raises(ParseError, match="DIMENSION"):
        parse_tsplib("EDGE_WEIGHT_TYPE: EUC_2D\n")
    with pytest.raises(ParseError, match="NODE_COORD_SECTION"):
        parse_tsplib("DIMENSION: 3\nEDGE_WEIGHT_TYPE: EUC_2D\n")


def test_parser_accepts_coordinates_outside_unit_square():
    text = ("DIMENSION: 3\nEDGE_WEIGHT_TYPE: EUC_2D\nNODE_COORD_SECTION\n"
            "1 -5 2\n2 100 0\n3 40 -7\nEOF\n")
    assert parse_tsplib(text).n == 3


def test_render_parse_round_trip_bit_exact():
    inst = generate(12, seed=99)
    again = parse_tsplib(render_tsplib(inst))
    assert np.array_equal(inst.coords, again.coords)
    assert again.name == inst.name


def test_validate_square_perimeter(square):
    t = Tour.from_order(square, (0, 1, 2, 3))
    assert validate_tour(square, t)
    assert t.length == pytest.approx(4.0)


def test_validate_square_diagonal_order(square):
    t = Tour.from_order(square, (0, 2, 1, 3))
    assert validate_tour(square, t)
    assert t.length == pytest.approx(2.0 + 2.0 * math.sqrt(2.0))


def test_validate_rejects_repeated_vertex(square):
    assert not validate_tour(square, Tour(order=(0, 1, 1, 3), length=4.0))


def test_validate_rejects_missing_vertex(square):
    assert not validate_tour(square, Tour(order=(0, 1, 2), length=4.0))


def test_validate_rejects_wrong_length(square):
    assert not validate_tour(square, Tour(order=(0, 1, 2, 3), length=4.5))


def test_brute_force_square(square):
    assert brute_force_optimum(square).length == pytest.approx(4.0)


def test_brute_force_triangle():
    inst = generate(3, seed=5)
    perimeter = inst.cost(0, 1) + inst.cost(1, 2) + inst.cost(0, 2)
    assert brute_force_optimum(inst).length == pytest.approx(perimeter)


def test_brute_force_size_cap():
    with pytest.raises(OracleSizeError):
        brute_force_optimum(generate(13, seed=0))


def test_brute_force_lower_bounds_all_tours():
    for seed in range(5):
        inst = generate(7, seed=seed)
        best = brute_force_optimum(inst).length
        assert all(best <= t.length + 1e-12 for t in all_tours(inst))


def test_tour_edges_close_the_cycle(square):
    t = Tour.from_order(square, (0, 1, 2, 3))
    assert set(t.edges()) == {(0, 1), (1, 2), (2, 3), (0, 3)}
