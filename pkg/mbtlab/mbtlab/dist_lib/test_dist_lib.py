# Copyright (c) 2025, MBTLab and contributors
# For license information, please see license.txt

import math

import numpy as np
import pytest
from scipy import stats
from scipy.special import gammaln

from mbtlab.exceptions import ValidationError
from mbtlab.mbtlab.dist_lib.dist_lib import (
	DiscreteTable,
	beta_geometric_pmf,
	binary_offspring,
	borel_pmf,
	categorical_sample,
	dirichlet_sample,
	export_table_csv,
	geometric_offspring,
	geometric_sample,
	gw_size_pmf,
	neg_dirichlet_multinomial_pmf,
	poisson_offspring,
	sample_beta_geometric,
	sample_borel,
	sample_neg_dirichlet_multinomial,
	size_biased,
	stable_offspring,
)


def binned_pvalue(draws, probs):
	"""Chi-square p-value of draws in 0..len(probs)-1 plus a lumped remainder bin."""
	probs = np.asarray(probs)
	observed = np.bincount(np.minimum(draws, len(probs)), minlength=len(probs) + 1)
	expected = np.append(probs, 1 - probs.sum()) * len(draws)
	return stats.chisquare(observed, expected).pvalue


def test_beta_geometric_examples():
	assert beta_geometric_pmf(1, 0) == 1.0
	assert beta_geometric_pmf(1, 3) == 0.0
	assert beta_geometric_pmf(0.5, 0) == pytest.approx(0.5)
	assert beta_geometric_pmf(0.5, 1) == pytest.approx(1 / 8)
	with pytest.raises(ValidationError):
		beta_geometric_pmf(0, 1)
	with pytest.raises(ValidationError):
		beta_geometric_pmf(1.5, 1)


@pytest.mark.parametrize("theta", [0.2, 0.5, 0.9])
def test_beta_geometric_normalizes_with_exact_tail(theta):
	N = 1000
	head = beta_geometric_pmf(theta, np.arange(N)).sum()
	# P(X >= N) = Γ(N+1-θ) / (Γ(1-θ) Γ(N+1))
	tail = math.exp(gammaln(N + 1 - theta) - gammaln(1 - theta) - gammaln(N + 1))
	assert head + tail == pytest.approx(1.0, abs=1e-9)


def test_beta_geometric_sampler():
	rng = np.random.default_rng(11)
	draws = sample_beta_geometric(0.5, rng, size=40_000)
	assert binned_pvalue(draws, beta_geometric_pmf(0.5, np.arange(5))) > 1e-3
	assert sample_beta_geometric(1, rng) == 0


def test_borel_examples():
	assert borel_pmf(1) == pytest.approx(math.exp(-1))
	assert borel_pmf(2) == pytest.approx(math.exp(-2))
	assert borel_pmf(3) == pytest.approx(1.5 * math.exp(-3))
	with pytest.raises(ValidationError):
		borel_pmf(0)


def test_borel_sampler():
	rng = np.random.default_rng(12)
	draws = sample_borel(rng, size=40_000) - 1
	assert binned_pvalue(draws, borel_pmf(np.arange(1, 6))) > 1e-3


def test_size_biased_examples():
	poisson = size_biased(poisson_offspring())
	for k in range(1, 6):
		assert poisson.pmf(k) == pytest.approx(math.exp(-1) / math.factorial(k - 1))
	assert size_biased(binary_offspring()).pmf(2) == 1.0
	assert size_biased(geometric_offspring()).pmf(1) == pytest.approx(0.25)
	with pytest.raises(ValidationError):
		size_biased(poisson_offspring(2.0))


@pytest.mark.parametrize("mean", [1.0, 0.5, 3.0, 250.0])
def test_poisson_offspring_table(mean):
	xi = poisson_offspring(mean)
	assert np.all(np.isfinite(xi.values))
	assert xi.values[-1] > 1e-300
	assert xi.values.sum() == pytest.approx(1.0 - xi.tail_mass, abs=1e-12)
	assert xi.tail_mass < 1e-12
	assert xi.pmf(3) == pytest.approx(stats.poisson.pmf(3, mean))
	assert poisson_offspring(0.0).values.tolist() == [1.0]


def test_stable_offspring():
	xi = stable_offspring(2)
	assert xi.pmf(0) == pytest.approx(0.5)
	assert xi.pmf(2) == pytest.approx(0.5)
	assert xi.values[3:].sum() == 0.0
	for beta in (1.2, 1.5, 1.8):
		xi = stable_offspring(beta)
		assert xi.pmf(0) == pytest.approx(1 / beta)
		assert xi.pmf(1) == 0.0
		assert xi.is_critical()
		assert xi.values.sum() + xi.tail_bound() == pytest.approx(1.0, abs=1e-9)
	xi = stable_offspring(1.5)
	assert abs(np.dot(np.arange(len(xi.values)), xi.values) - 1) < 0.01
	with pytest.raises(ValidationError):
		stable_offspring(1.0)


def test_gw_size_pmf_matches_borel():
	table = gw_size_pmf(poisson_offspring(), 40)
	n = np.arange(1, 31)
	np.testing.assert_allclose(table.pmf(n), borel_pmf(n), rtol=1e-10)
	assert table.truncation_error <= 1e-12


def test_gw_size_pmf_geometric():
	xi = geometric_offspring()
	table = gw_size_pmf(xi, 20)
	assert table.pmf(1) == pytest.approx(0.5)
	assert table.pmf(2) == pytest.approx(1 / 8)
	assert table.pmf(3) == pytest.approx(1 / 16)
	for law in (poisson_offspring(), binary_offspring(), stable_offspring(1.5)):
		assert gw_size_pmf(law, 5).pmf(1) == pytest.approx(law.pmf(0))


@pytest.mark.parametrize("xi", [poisson_offspring(), geometric_offspring()], ids=["poisson", "geometric"])
def test_otter_dwass_self_consistency(xi):
	n_max = 40
	table = gw_size_pmf(xi, n_max)
	single = table.values
	power = np.zeros(n_max + 1)
	power[0] = 1.0
	for k in range(1, 5):
		power = np.convolve(power, single)[: n_max + 1]
		np.testing.assert_allclose(power[1:], table.forest[1:, k], atol=1e-9)


def test_leaf_table_of_binary_offspring_is_catalan():
	table = gw_size_pmf(binary_offspring(), 15, count="leaves")
	for n in range(1, 16):
		catalan = math.comb(2 * n - 2, n - 1) // n
		assert table.pmf(n) == pytest.approx(catalan / 2 ** (2 * n - 1))


def test_size_table_lattice():
	table = gw_size_pmf(binary_offspring(), 101)
	assert (table.period, table.residue) == (2, 1)
	assert not table.supported(4)
	assert table.supported(5)
	assert table.supported(3001)
	assert not table.supported(3000)
	rng = np.random.default_rng(13)
	assert np.all(table.sampler().sample(rng, size=5000) % 2 == 1)


def test_size_table_rejects_bad_input():
	with pytest.raises(ValidationError):
		gw_size_pmf(poisson_offspring(0.5), 10)
	with pytest.raises(ValidationError):
		gw_size_pmf(poisson_offspring(), 10, count="edges")


def test_neg_dirichlet_multinomial_examples():
	for k in (2, 3, 5):
		assert neg_dirichlet_multinomial_pmf(k, np.zeros(k - 1)) == pytest.approx(1 / k)
	for n in range(10):
		assert neg_dirichlet_multinomial_pmf(2, [n]) == pytest.approx(beta_geometric_pmf(0.5, n))
	with pytest.raises(ValidationError):
		neg_dirichlet_multinomial_pmf(3, [1])


def test_neg_dirichlet_multinomial_normalizes():
	N = 50
	a, b = np.meshgrid(np.arange(N + 1), np.arange(N + 1))
	keep = a + b <= N
	counts = np.stack([a[keep], b[keep]], axis=-1)
	head = neg_dirichlet_multinomial_pmf(3, counts).sum()
	theta = 1 / 3
	tail = math.exp(gammaln(N + 2 - theta) - gammaln(1 - theta) - gammaln(N + 2))
	assert head + tail == pytest.approx(1.0, abs=1e-9)


def test_neg_dirichlet_multinomial_sampler_total_is_beta_geometric():
	rng = np.random.default_rng(14)
	totals = np.array([sample_neg_dirichlet_multinomial(3, rng).sum() for _ in range(20_000)])
	assert binned_pvalue(totals, beta_geometric_pmf(1 / 3, np.arange(4))) > 1e-3


def test_plumbing_samplers():
	rng = np.random.default_rng(15)
	assert dirichlet_sample(4, 0.5, rng).sum() == pytest.approx(1.0)
	assert geometric_sample(1.0, rng) == 0
	assert categorical_sample([1.0], rng) == 0
	with pytest.raises(ValidationError):
		categorical_sample([0.0, 0.0], rng)


def test_discrete_table_pareto_tail_on_lattice():
	table = DiscreteTable([0.5, 0.0, 0.25], start=1, tail_exponent=0.5, period=2)
	assert table.tail_mass == pytest.approx(0.25)
	assert table.pmf(2) == 0.0
	assert table.pmf(6) == 0.0
	assert table.pmf(7) > 0.0
	draws = table.sample(np.random.default_rng(16), size=4000)
	assert np.all(draws % 2 == 1)
	assert np.mean(draws > 3) == pytest.approx(0.25, abs=0.03)


def test_sample_generation():
	rng = np.random.default_rng(17)
	total, zeros = poisson_offspring().sample_generation(rng, 100_000)
	assert abs(total - 100_000) < 5 * math.sqrt(100_000)
	assert abs(zeros - 100_000 * math.exp(-1)) < 5 * math.sqrt(100_000)
	assert poisson_offspring().sample_generation(rng, 0) == (0, 0)


def test_export_table_csv(tmp_path):
	path = tmp_path / "borel.csv"
	export_table_csv(path, gw_size_pmf(poisson_offspring(), 3).to_rows(), comments=["model gw-poisson"])
	lines = path.read_text().splitlines()
	assert lines[0] == "# model gw-poisson"
	assert lines[1] == "n,pmf"
	assert len(lines) == 5
