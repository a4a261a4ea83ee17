# %% [markdown]
# Signal/noise boundary versus channel volatility
#
# A faster-moving planted subspace smears energy over more eigen-directions
# inside one stationarity window, so more components are needed to reach a
# given reconstruction error.  This walks the simulator over a few volatility
# levels and prints the mean boundary and signal energy at -12 dB.

# %%
import numpy as np

from csitrack import simulator as sim
from csitrack.core import Axis
from csitrack.covariance import EstimatorConfig, estimate_stream
from csitrack.eigen import eigendecompose
from csitrack.subspace import find_boundary, mse_curve

est = EstimatorConfig("batch", window_len=25)

# %%
print("volatility  boundary  E_s")
for vol in (0.0, 0.03, 0.09, 0.15):
    bounds, energy = [], []
    for seed in range(10):
        cfg = sim.ChannelSimConfig(volatility=vol, correlation=0.9, seed=seed)
        frames = (f for f, _ in sim.iter_stream(cfg, 250))
        for cov in estimate_stream(frames, Axis.DY, est):
            part = find_boundary(eigendecompose(cov), -12.0)
            bounds.append(part.boundary)
            energy.append(part.e_s)
    print(f"{vol:10.2f}  {np.mean(bounds):8.2f}  {np.mean(energy):.3f}")

# %% [markdown]
# The normalised MSE curve of a single estimate shows where the boundary sits.

# %%
cfg = sim.ChannelSimConfig(volatility=0.05, seed=1)
frames = [f for f, _ in sim.iter_stream(cfg, 25)]
basis = eigendecompose(next(estimate_stream(frames, Axis.DY, est)))
curve = mse_curve(basis)
for i, v in enumerate(curve[:6]):
    print(f"keep {i}: {10 * np.log10(v / curve[0]):7.2f} dB")
print("boundary at -12 dB:", round(find_boundary(basis, -12.0).boundary, 3))
