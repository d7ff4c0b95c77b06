import numpy as np
import pytest
from scipy import ndimage

from basrelief.errors import UnstableStep, ValidationError
from basrelief.image_to_normal import (
    GvfParams,
    SobelParams,
    canny_edges,
    edge_gradient,
    grayscale,
    gvf_base_normal,
    gvf_energy,
    gvf_field,
    normal_from_image,
)


def test_grayscale_coefficients():
    white = np.ones((2, 2, 3))
    black = np.zeros((2, 2, 3))
    red = np.zeros((2, 2, 3))
    red[..., 0] = 1.0
    np.testing.assert_allclose(grayscale(white), 1.0)
    np.testing.assert_allclose(grayscale(black), 0.0)
    np.testing.assert_allclose(grayscale(red), 0.299)


def test_sobel_params_validation():
    with pytest.raises(ValidationError):
        SobelParams(alpha1=0.0)
    with pytest.raises(ValidationError):
        SobelParams(alpha2=1.5)


def test_normal_from_constant_image():
    g = np.full((6, 6), 0.4)
    N = normal_from_image(g, SobelParams(alpha1=1.0, alpha2=0.5))
    np.testing.assert_allclose(N, np.broadcast_to([0.0, 0.0, 1.0], (6, 6, 3)), atol=1e-12)


def test_normal_from_ramp_matches_hand_sobel():
    # ramp g = c*x: hand-convolving the 1/8-normalized Sobel gives dx = c, dy = 0
    c = 0.05
    g = c * np.arange(8, dtype=float)[None, :] * np.ones((8, 1))
    p = SobelParams(alpha1=1.0, alpha2=0.5)
    N = normal_from_image(g, p)

    kernel = np.array([[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]]) / 8.0
    window = g[2:5, 2:5]
    dx_oracle = float(np.sum(kernel * window))
    assert abs(dx_oracle - c) < 1e-15
    dz = p.alpha1 * p.alpha2 ** abs(dx_oracle)
    expected = np.array([-dx_oracle, 0.0, dz])
    expected /= np.linalg.norm(expected)
    np.testing.assert_allclose(N[3, 3], expected, atol=1e-12)
    np.testing.assert_allclose(N[1:-1, 1:-1], np.broadcast_to(expected, (6, 6, 3)), atol=1e-12)


def test_normal_from_image_z_always_positive():
    rng = np.random.default_rng(0)
    g = rng.random((16, 16))
    N = normal_from_image(g, SobelParams(alpha1=0.6, alpha2=0.3))
    assert np.all(N[..., 2] > 0)
    np.testing.assert_allclose(np.linalg.norm(N, axis=-1), 1.0, atol=1e-12)


def test_canny_constant_image_has_no_edges():
    np.testing.assert_allclose(canny_edges(np.full((16, 16), 0.7), 0.1, 0.3), 0.0)


def test_canny_vertical_step_is_single_pixel_line():
    g = np.zeros((16, 16))
    g[:, 8:] = 1.0
    edges = canny_edges(g, 0.2, 0.5)
    cols = np.unique(np.nonzero(edges)[1])
    assert len(cols) == 1
    col = cols[0]
    assert col in (7, 8)
    np.testing.assert_allclose(edges[:, col], 1.0)


def test_canny_nested_squares_give_two_closed_contours():
    g = np.zeros((40, 40))
    g[6:34, 6:34] = 0.5
    g[14:26, 14:26] = 1.0
    edges = canny_edges(g, 0.1, 0.3)
    labels, count = ndimage.label(edges > 0, structure=np.ones((3, 3), dtype=int))
    assert count == 2
    # closed contours split the background into outside / ring / inside
    _, regions = ndimage.label(edges == 0)
    assert regions == 3


def test_canny_threshold_validation():
    with pytest.raises(ValidationError):
        canny_edges(np.zeros((4, 4)), 0.5, 0.2)


def circle_edge_map(n=32, radius=10.0):
    jj, ii = np.meshgrid(np.arange(n, dtype=float), np.arange(n, dtype=float))
    c = (n - 1) / 2.0
    d = np.sqrt((jj - c) ** 2 + (ii - c) ** 2)
    return (np.abs(d - radius) < 0.8).astype(float)


def test_gvf_zero_edge_map_gives_flat_normals():
    e = np.zeros((12, 12))
    field = gvf_field(e, GvfParams(iterations=50))
    np.testing.assert_allclose(field, 0.0, atol=1e-15)
    N = gvf_base_normal(e, GvfParams(iterations=50, z_const=0.7))
    np.testing.assert_allclose(N, np.broadcast_to([0.0, 0.0, 1.0], (12, 12, 3)), atol=1e-15)


def test_gvf_zero_iterations_returns_edge_gradient():
    e = circle_edge_map()
    field = gvf_field(e, GvfParams(iterations=0))
    es = ndimage.gaussian_filter(e, 1.0, mode="nearest")
    expected = np.stack([np.gradient(es, axis=1), np.gradient(es, axis=0)], axis=-1)
    np.testing.assert_allclose(field, expected, atol=0.0)


def test_gvf_energy_non_increasing():
    rng = np.random.default_rng(1)
    e = (rng.random((32, 32)) > 0.9).astype(float)
    p = GvfParams(omega=2.0, iterations=1, step_size=0.2)
    field = gvf_field(e, GvfParams(omega=2.0, iterations=0))
    energies = [gvf_energy(field, e, p)]
    for _ in range(300):
        field = gvf_field(e, p, initial=field)
        energies.append(gvf_energy(field, e, p))
    diffs = np.diff(energies)
    assert np.all(diffs <= 1e-12)
    assert np.all(np.isfinite(field))


def test_gvf_edge_fidelity_grows_with_omega():
    e = circle_edge_map()
    ge = edge_gradient(e)
    weight = ge[..., 0] ** 2 + ge[..., 1] ** 2
    strong = weight > np.quantile(weight, 0.9)

    def edge_misfit(omega):
        field = gvf_field(e, GvfParams(omega=omega, iterations=2000))
        return float(np.linalg.norm((field - ge)[strong]))

    assert edge_misfit(20.0) < edge_misfit(2.0)


def test_gvf_converged_field_is_harmonic_away_from_edges():
    e = circle_edge_map(16, radius=6.0)
    field = gvf_field(e, GvfParams(omega=5.0, iterations=60000))
    ge = edge_gradient(e)
    weight = ge[..., 0] ** 2 + ge[..., 1] ** 2
    quiet = weight < 1e-7  # Gaussian tails never reach exact zero
    quiet[0, :] = quiet[-1, :] = quiet[:, 0] = quiet[:, -1] = False
    assert quiet.sum() > 0
    for c in range(2):
        f = field[..., c]
        lap = f[:-2, 1:-1] + f[2:, 1:-1] + f[1:-1, :-2] + f[1:-1, 2:] - 4 * f[1:-1, 1:-1]
        assert np.max(np.abs(lap[quiet[1:-1, 1:-1]])) <= 1e-6


def test_gvf_diffusion_spreads_toward_center_with_iterations():
    # the stroke sits at radius 10; more iterations push field into the middle
    # (diffusion length ~ sqrt(2 dt k), so the effect shows at small k here)
    e = circle_edge_map()
    jj, ii = np.meshgrid(np.arange(32, dtype=float), np.arange(32, dtype=float))
    inner = np.sqrt((jj - 15.5) ** 2 + (ii - 15.5) ** 2) < 5.0
    few = gvf_field(e, GvfParams(iterations=5))
    many = gvf_field(e, GvfParams(iterations=200))
    assert np.mean(np.linalg.norm(many, axis=-1)[inner]) > 2 * np.mean(
        np.linalg.norm(few, axis=-1)[inner]
    )


def test_gvf_unstable_step_raises():
    with pytest.raises(UnstableStep):
        gvf_field(np.zeros((8, 8)), GvfParams(step_size=0.3))
    with pytest.raises(UnstableStep):
        gvf_field(np.zeros((8, 8)), GvfParams(step_size=0.0))


def test_gvf_params_validation():
    with pytest.raises(ValidationError):
        GvfParams(omega=-1.0)
    with pytest.raises(ValidationError):
        GvfParams(iterations=-1)
    with pytest.raises(ValidationError):
        GvfParams(z_const=0.0)


def test_gvf_base_normal_small_z_lifts_more():
    e = circle_edge_map()
    steep = gvf_base_normal(e, GvfParams(iterations=500, z_const=0.2))
    gentle = gvf_base_normal(e, GvfParams(iterations=500, z_const=2.0))
    assert np.mean(np.arccos(np.clip(steep[..., 2], -1, 1))) > np.mean(
        np.arccos(np.clip(gentle[..., 2], -1, 1))
    )
