from app.optimizer.base import BaseOptimizer, OptimizerConfig
from app.optimizer.quasi_newton import QuasiNewtonOptimizer

__all__ = ["BaseOptimizer", "OptimizerConfig", "QuasiNewtonOptimizer"]
