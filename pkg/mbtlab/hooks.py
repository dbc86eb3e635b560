app_name = "mbtlab"
app_title = "MBTLab"
app_publisher = "MBTLab contributors"
app_description = "Markov branching trees lab: local limits, scaling checks and GHP distances"
app_license = "mit"

# Split laws
# ----------
# public name -> factory(params, split_table_cap=..., gw_table_cap=...) returning a SplitLaw

split_law_registry = {
	"gw-poisson": "mbtlab.mbtlab.split_laws.galton_watson.gw_poisson",
	"gw-geometric": "mbtlab.mbtlab.split_laws.galton_watson.gw_geometric",
	"gw-binary": "mbtlab.mbtlab.split_laws.galton_watson.gw_binary",
	"gw-stable": "mbtlab.mbtlab.split_laws.galton_watson.gw_stable",
	"gw-poisson-leaves": "mbtlab.mbtlab.split_laws.galton_watson.gw_poisson_leaves",
	"gw-geometric-leaves": "mbtlab.mbtlab.split_laws.galton_watson.gw_geometric_leaves",
	"gw-stable-leaves": "mbtlab.mbtlab.split_laws.galton_watson.gw_stable_leaves",
	"cayley-cut": "mbtlab.mbtlab.split_laws.binary_laws.cayley_cut",
	"recursive-cut": "mbtlab.mbtlab.split_laws.binary_laws.recursive_cut",
	"alpha-gamma": "mbtlab.mbtlab.split_laws.alpha_gamma.alpha_gamma",
	"ford": "mbtlab.mbtlab.split_laws.binary_laws.ford",
	"beta-splitting": "mbtlab.mbtlab.split_laws.binary_laws.beta_splitting",
	"kary": "mbtlab.mbtlab.split_laws.kary.kary",
}

# Growth models
# -------------
# public name -> callable(params, n, rng) returning a Tree

growth_registry = {
	"cayley": "mbtlab.mbtlab.growth_models.growth_models.cayley_model",
	"recursive": "mbtlab.mbtlab.growth_models.growth_models.recursive_model",
	"cayley-cut-tree": "mbtlab.mbtlab.growth_models.growth_models.cayley_cut_model",
	"recursive-cut-tree": "mbtlab.mbtlab.growth_models.growth_models.recursive_cut_model",
	"alpha-gamma": "mbtlab.mbtlab.growth_models.growth_models.alpha_gamma_model",
	"kary": "mbtlab.mbtlab.growth_models.growth_models.kary_model",
	"kesten": "mbtlab.mbtlab.growth_models.growth_models.kesten_model",
}

# Validation suites
# -----------------
# suite name -> callable(settings) returning a list of CheckResult

validation_suites = {
	"pmf": "mbtlab.mbtlab.suites.validate.pmf_suite",
	"local": "mbtlab.mbtlab.suites.validate.local_suite",
	"balls": "mbtlab.mbtlab.suites.validate.balls_suite",
	"volume": "mbtlab.mbtlab.suites.validate.volume_suite",
	"growth": "mbtlab.mbtlab.suites.validate.growth_suite",
	"ghp": "mbtlab.mbtlab.suites.validate.ghp_suite",
}


def get_attr(dotted_path):
	"""Import `package.module.attribute` and return the attribute."""
	from importlib import import_module

	module_name, _, attr = dotted_path.rpartition(".")
	return getattr(import_module(module_name), attr)
