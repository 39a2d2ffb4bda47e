"""Design and simulation toolkit for tunable origami bellows springs.

Modules: ``pattern`` (crease patterns), ``stiffness`` (stiffness models and
test-data reduction), ``kinematics`` (tendon-rig charts), ``workspace``
(reachable volume), ``juggle`` (hybrid juggling and its return map) and
``cli``.
"""
__version__ = "0.1.0"

from ._backend import BACKEND  # noqa: E402

__all__ = ["__version__", "BACKEND"]
