# %% [markdown]
# # Geometry of a single-direction subspace change
#
# A basis U_prev of an r-dimensional subspace is rotated in one direction.
# The rotated column u_chg moves towards a fresh direction u_add orthogonal
# to the old subspace, by an angle theta.

# %%
import numpy as np

from pst import model
from pst.metrics import subspace_error

rng = np.random.default_rng(0)
n, r = 50, 4
u_prev = model.generate_subspace(n, r, rng)
u_new, ev = model.rotate_one_direction(u_prev, np.deg2rad(30), rng=rng)

# %% [markdown]
# The subspace error between the old and new bases equals sin(theta),
# and u_add is orthogonal to every old column.

# %%
print("SE(U_prev, U_new) =", subspace_error(u_prev, u_new), " sin 30 =", np.sin(np.deg2rad(30)))
print("max |U_prev' u_add| =", np.max(np.abs(u_prev.T @ ev.u_add)))

# %% [markdown]
# The changed and deleted directions are rotations of (u_chg, u_add) in
# their common plane.

# %%
s, c = np.sin(ev.theta), np.cos(ev.theta)
print("u_chd residual:", np.linalg.norm(ev.u_chd - (ev.u_add * s + ev.u_chg * c)))
print("u_del residual:", np.linalg.norm(ev.u_del - (ev.u_chg * s - ev.u_add * c)))

# %% [markdown]
# A scenario strings several changes together, one every q time steps,
# and can be saved as JSON and regenerated from its seed.

# %%
sc = model.generate_scenario(n, r, m=60, q=40, theta_degrees=[20, 40, 60], seed=5)
print("change times:", sc.change_times)
for j in range(1, len(sc.episodes)):
    print(f"episode {j}: SE to previous = "
          f"{subspace_error(sc.episodes[j - 1].u_true, sc.episodes[j].u_true):.4f}")
