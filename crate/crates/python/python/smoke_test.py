"""Smoke test for the blocktri_py extension module.

Build and install first, e.g. `maturin develop --release` in crates/python.
"""

import cmath
import os
import tempfile

import blocktri_py as bt


def max_block(sizes):
    return max(sizes) if sizes else 0


def main():
    jordan = bt.Matrix([[0, 1], [0, 0]])
    delta = bt.commutator(jordan).to_rows()
    assert delta == [[-1, 0], [0, 1]], delta

    arrow = bt.arrow_hermitian_plus_rank_one(32, 1)
    assert arrow.certificate.residual <= 1e-12
    red, theta = bt.reduce_instance(arrow)
    assert max_block(red.block_sizes) <= 2, red.block_sizes
    assert red.unitarity_residual <= 1e-11 * 32 ** 0.5
    assert theta == 0.0

    comp = bt.random_companion(16, 1)
    red, _ = bt.reduce_instance(comp)
    assert max_block(red.block_sizes) <= 4, red.block_sizes
    a0 = red.project(comp.matrix)
    c0 = red.project(comp.perturbation)
    track = bt.qr_track(a0, c0, 10)
    assert all(rank <= 2 for rank, _ in track), track

    par = bt.curve_normal_plus_rank_one(32, "parabola-arc", 3)
    assert par.conic.max_residual <= 1e-10
    red, theta = bt.reduce_instance(par)
    assert red.block_sizes[0] <= 6 and max_block(red.block_sizes[1:]) <= 4, red.block_sizes

    h, z = bt.fourier_sum(16, 1)
    red = bt.block_lanczos(h, z)
    assert red.breakdown_events and red.breakdown_events[0][0] <= 3

    circle = bt.conic_fit([cmath.exp(0.7j * k) for k in range(9)])
    assert abs(circle.a00.real / circle.a11.real + 1) < 1e-12
    alpha, beta, gamma = circle.leading_part(1)
    assert abs(alpha + 0.5 * circle.a11.real) < 1e-12

    assert bt.lemma31_residual(bt.Matrix([[1, 2j], [0.5, -1]]), 3) <= 1e-12

    with tempfile.TemporaryDirectory() as d:
        path = os.path.join(d, "m.mtx")
        bt.write_matrix_market(path, comp.matrix)
        back = bt.read_matrix_market(path)
        assert (back - comp.matrix).frobenius_norm() == 0.0

    assert bt.spy(bt.Matrix.identity(3)) == "*..\n.*.\n..*\n"
    print("blocktri_py smoke test passed")


if __name__ == "__main__":
    main()
