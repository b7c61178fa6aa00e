//! Built-in default configs per subcommand (the same text ships under
//! `configs/`). Passing `--config` replaces the whole text.

pub fn default_config(subcommand: &str) -> &'static str {
    match subcommand {
        "verify-lemma31" => LEMMA31,
        "verify-lemma32" => LEMMA32,
        "verify-theorem1" => THEOREM1,
        "verify-corollary" => COROLLARY,
        "localize" => LOCALIZE,
        "simulate" => SIMULATE,
        "integrate" => INTEGRATE,
        "metrics" => METRICS,
        _ => GENERIC,
    }
}

pub const GENERIC: &str = "\
[manifold]
catalog = sphere
ambient_dim = 3
blend_radius = 0.5

[martingale]
lambda = 2.0
theta = 0.9
delta = 0.2
kappa = 0.0
horizon = 4.0
grid_steps = 2000

[metrics]
p = 2
checkpoints = 2,4
tolerance = 0.01

[run]
paths = 1000
base_seed = 20240
radius = 2.5
";

pub const LEMMA31: &str = "\
# Stopped quadratic variation boundedness across an 8x (lambda, grid) family,
# plus the single-jump hand formula. The long horizon keeps censoring by the
# horizon negligible for the smallest rate.
[manifold]
catalog = sphere
ambient_dim = 3
blend_radius = 0.5

[martingale]
lambda = 2.0
theta = 0.35
delta = 0.05
kappa = 0.0
horizon = 16.0
jump_cap = 0.35
grid_steps = 4000

[sweep]
lambdas = 1.0,2.0,8.0
grids = 1600,4000,12800

[metrics]
p = 2

[run]
paths = 3000
base_seed = 3101
radius = 0.8
";

pub const LEMMA32: &str = "\
# Pair-difference quadratic variation controlled by sup-distance moments:
# the coupling ladder in the long-horizon regime, the closed-form single
# shared jump family, and the pair-energy Hessian inequality sample.
[manifold]
catalog = sphere
ambient_dim = 3
blend_radius = 0.5

[martingale]
lambda = 500.0
theta = 1.2
delta = 0.0
kappa = 0.0
horizon = 4.0
jump_cap = 2.0
grid_steps = 22000

[sweep]
epsilons = 0.2,0.1,0.05,0.025

[metrics]
p = 2

[run]
paths = 256
base_seed = 3201
radius = 2.5
hessian_samples = 1000000
";

pub const THEOREM1: &str = "\
# H^p upper bound of embedded pair differences against the sup-distance
# moment, over the coupling ladder, with the explicit coordinate
# decompositions. Long-horizon regime; R beyond the sphere diameter keeps
# the stopped window maximal.
[manifold]
catalog = sphere
ambient_dim = 3
blend_radius = 0.5

[martingale]
lambda = 1500.0
theta = 1.2
delta = 0.0
kappa = 0.0
horizon = 4.0
jump_cap = 2.0
grid_steps = 66000

[sweep]
epsilons = 0.2,0.1,0.05,0.025

[metrics]
p = 2

[run]
paths = 160
base_seed = 3301
radius = 2.5
";

pub const COROLLARY: &str = "\
# Convergence pipeline for the coupled ladder eps_n = 0.2 * 2^-n: the metric
# triple decreasing below tolerance, martingality of the limit, common
# killing indices for killed shapes, and the independent-seed negative
# control that must fail.
[manifold]
catalog = sphere
ambient_dim = 3
blend_radius = 0.5

[martingale]
lambda = 1.5
theta = 0.09
delta = 0.1
kappa = 0.0
horizon = 4.0
jump_cap = 0.5
grid_steps = 2000

[sweep]
epsilons = 0.2,0.1,0.05,0.025

[metrics]
p = 2
checkpoints = 2,4
tolerance = 0.01

[run]
paths = 2000
base_seed = 3401
radius = 2.5
localization_radius = 1.2
";

pub const LOCALIZE: &str = "\
# Localization chains over a geodesic-ball cover with the standard radii
# (inner = R/4, outer = R/2); round-robin ball sequence.
[manifold]
catalog = sphere
ambient_dim = 3
blend_radius = 0.5

[martingale]
lambda = 1.5
theta = 0.2
delta = 0.1
kappa = 0.0
horizon = 4.0
jump_cap = 0.5
grid_steps = 2000

[sweep]
epsilons = 0.2,0.1,0.05,0.025

[run]
paths = 1000
base_seed = 3501
radius = 2.5
localization_radius = 1.2
";

pub const SIMULATE: &str = "\
[manifold]
catalog = sphere
ambient_dim = 3

[martingale]
lambda = 2.0
theta = 0.9
delta = 0.2
horizon = 4.0
grid_steps = 2000

[driver]
kind = geodesic_jump
dump_paths = 8

[run]
paths = 64
base_seed = 4101
";

pub const INTEGRATE: &str = "\
[manifold]
catalog = sphere
ambient_dim = 3

[martingale]
lambda = 3.0
theta = 0.7
delta = 0.4
horizon = 4.0
grid_steps = 4000

[fields]
integrand = coord:2

[run]
paths = 1
base_seed = 4201
";

pub const METRICS: &str = "\
[manifold]
catalog = sphere
ambient_dim = 3

[martingale]
lambda = 2.0
theta = 0.5
delta = 0.2
horizon = 4.0
grid_steps = 2000

[sweep]
epsilons = 0.1

[metrics]
p = 2

[run]
paths = 1000
base_seed = 4301
radius = 2.5
";
