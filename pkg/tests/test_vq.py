import numpy as np
import pytest

from pounce.nn import Tensor
from pounce.vq import Codebook, quantize, straight_through, vq_losses


def small_book(values):
    rng = np.random.default_rng(0)
    book = Codebook(rng, n_codes=len(values), dim=len(values[0]))
    book.embeddings.data = np.asarray(values, dtype=np.float64)
    return book


def test_exact_match_returns_zero_distance():
    rng = np.random.default_rng(1)
    book = Codebook(rng)
    z = book.embeddings.data[17].copy()
    idx, z_q = quantize(z, book)
    assert idx == 17
    np.testing.assert_array_equal(z_q, z)


def test_nearest_by_inspection():
    book = small_book([[0.0, 0.0], [1.0, 1.0]])
    idx, _ = quantize(np.array([0.1, 0.2]), book)
    assert idx == 0


def test_brute_force_agreement():
    rng = np.random.default_rng(2)
    book = Codebook(rng)
    queries = rng.standard_normal((200, book.dim)) * 0.2
    idx, _ = quantize(queries, book, count_usage=False)
    e = book.embeddings.data
    for q, i in zip(queries, idx):
        brute = int(np.argmin(((q[None, :] - e) ** 2).sum(axis=1)))
        assert brute == int(i)


def test_tie_breaks_to_lowest_index():
    book = small_book([[1.0, 0.0], [1.0, 0.0], [5.0, 5.0]])
    idx, _ = quantize(np.array([0.9, 0.1]), book)
    assert idx == 0


def test_quantize_idempotent():
    rng = np.random.default_rng(3)
    book = Codebook(rng)
    _, z_q = quantize(rng.standard_normal(book.dim), book)
    idx2, z_q2 = quantize(z_q, book)
    np.testing.assert_array_equal(z_q, z_q2)
    idx3, _ = quantize(z_q2, book)
    assert idx2 == idx3


def test_usage_counters_and_perplexity():
    book = small_book([[0.0], [1.0], [2.0], [3.0]])
    book.reset_usage()
    for v in [0.1, 0.9, 2.1, 3.2]:
        quantize(np.array([v]), book)
    assert book.usage.tolist() == [1, 1, 1, 1]
    assert abs(book.perplexity() - 4.0) < 1e-12


def test_losses_zero_at_code():
    book = small_book([[0.5, -0.5]])
    z_e = Tensor(np.array([[0.5, -0.5]]), requires_grad=True)
    cb, commit = vq_losses(z_e, book, np.array([0]))
    assert float(cb.data) == 0.0
    assert float(commit.data) == 0.0


def test_losses_direct_evaluation():
    # ||z_e - e||^2 = 0.04, beta = 0.25 -> (0.04, 0.01)
    book = small_book([[0.0, 0.0]])
    z_e = Tensor(np.array([[0.2, 0.0]]), requires_grad=True)
    cb, commit = vq_losses(z_e, book, np.array([0]), beta=0.25)
    assert abs(float(cb.data) - 0.04) < 1e-12
    assert abs(float(commit.data) - 0.01) < 1e-12


def test_stop_gradient_routing():
    book = small_book([[0.0, 0.0]])
    z_e = Tensor(np.array([[0.3, 0.4]]), requires_grad=True)
    cb, commit = vq_losses(z_e, book, np.array([0]))

    book.embeddings.grad = None
    cb.backward()
    assert z_e.grad is None            # codebook loss never reaches encoder
    assert book.embeddings.grad is not None
    assert np.any(book.embeddings.grad != 0)

    book.embeddings.grad = None
    z_e.grad = None
    commit.backward()
    assert book.embeddings.grad is None  # commitment never reaches codes
    assert np.any(z_e.grad != 0)


def test_negative_beta_rejected():
    book = small_book([[0.0]])
    with pytest.raises(ValueError):
        vq_losses(Tensor(np.array([[1.0]])), book, np.array([0]), beta=-1.0)


def test_straight_through_value_and_identity_gradient():
    z_e = Tensor(np.array([[1.0, 2.0, 3.0]]), requires_grad=True)
    z_q = np.array([[0.9, 2.1, 2.7]])
    bridged = straight_through(z_e, z_q)
    np.testing.assert_array_equal(bridged.data, z_q)
    bridged.sum().backward()
    np.testing.assert_array_equal(z_e.grad, np.ones((1, 3)))


def test_straight_through_finite_difference_in_cell():
    """Encoder gradient through the bottleneck with a fixed quadratic head,
    checked inside one Voronoi cell where quantization is locally constant."""
    rng = np.random.default_rng(4)
    book = Codebook(rng, n_codes=8, dim=3)
    target = rng.standard_normal(3)
    z0 = book.embeddings.data[2] + 0.001 * rng.standard_normal(3)

    z_e = Tensor(z0.copy()[None, :], requires_grad=True)
    _, z_q = quantize(z0, book, count_usage=False)
    bridged = straight_through(z_e, z_q[None, :])
    ((bridged - Tensor(target[None, :])).square().sum()).backward()
    analytic = z_e.grad[0]

    # the pass-through gradient equals the derivative of the downstream
    # quadratic with respect to the decoder input, evaluated at z_q
    h = 1e-6
    numeric = np.zeros(3)
    for i in range(3):
        vp, vm = z_q.copy(), z_q.copy()
        vp[i] += h
        vm[i] -= h
        numeric[i] = (((vp - target) ** 2).sum() - ((vm - target) ** 2).sum()) / (2 * h)
        # sanity: z0 +/- h stays in the same Voronoi cell
        zp, zm = z0.copy(), z0.copy()
        zp[i] += h
        zm[i] -= h
        _, qp = quantize(zp, book, count_usage=False)
        _, qm = quantize(zm, book, count_usage=False)
        np.testing.assert_array_equal(qp, qm)
    np.testing.assert_allclose(analytic, 2.0 * (z_q - target), atol=1e-12)
    assert np.max(np.abs(analytic - numeric)) <= 1e-4
