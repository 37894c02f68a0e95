import numpy as np

from app.command.base import BaseCommand, CommandFailure, CommandResult, write_json
from app.config import RunConfig
from app.exceptions import ConfigError, OptimizationError
from app.logger import logger
from app.quadrature import write_density_csv, write_rows_csv
from app.schema import RunTrace


class MatchCommand(BaseCommand):
    name: str = "match"
    description: str = (
        "Minimize the distance between the design pdf and the target pdf and "
        "write the per-call trace, convergence history, pdf curves and exchange curves."
    )

    async def execute(self, config: RunConfig) -> CommandResult:
        if config.target is None:
            raise ConfigError("target: match needs a target pdf")
        flow = self.build_flow(config)
        s0 = np.asarray(config.model.design, dtype=float)
        out = config.output_dir

        try:
            trace = await flow.execute(s0)
        except OptimizationError as e:
            files = []
            if e.trace is not None:
                files = [self.write_trace(out, e.trace, s0, None)]
            return CommandFailure(error=e.message, files=files)

        final = np.asarray(trace.best.s)
        initial_density = flow.initial_density()
        final_density = flow.design_density(final)
        files = [
            self.write_trace(out, trace, s0, final),
            write_rows_csv(
                out / "convergence.csv",
                ["call", "normalized_distance", "gradient_norm"],
                trace.convergence_rows(),
            ),
            write_density_csv(out / "initial_pdf.csv", initial_density),
            write_density_csv(out / "final_pdf.csv", final_density),
            write_density_csv(out / "target_pdf.csv", flow.target_vector),
        ]

        initial_curve = flow.exchange_curve(s0)
        final_curve = flow.exchange_curve(final)
        files.append(
            write_rows_csv(
                out / "exchange.csv",
                ["u", "q_initial", "line_initial", "q_final", "line_final"],
                (
                    (u, q0, l0, q1, l1)
                    for (u, q0, l0), (_, q1, l1) in zip(initial_curve, final_curve)
                ),
            )
        )

        _, initial_variance = initial_density.moments()
        _, final_variance = final_density.moments()
        summary = {
            "termination": trace.termination.value,
            "function_calls": trace.function_calls,
            "model_evaluations": trace.model_evaluations,
            "iterations": trace.iterations,
            "final_design": final.tolist(),
            "final_normalized_distance": trace.best.normalized_distance,
            "initial_variance": initial_variance,
            "final_variance": final_variance,
        }
        logger.info(
            f"match: {trace.function_calls} calls, normalized distance "
            f"{trace.best.normalized_distance:.6e}, variance "
            f"{initial_variance:.6g} -> {final_variance:.6g}"
        )
        return CommandResult(output=summary, files=files)

    @staticmethod
    def write_trace(out, trace: RunTrace, s0, final):
        payload = {
            "initial_design": np.asarray(s0).tolist(),
            "final_design": None if final is None else np.asarray(final).tolist(),
            "function_calls": trace.function_calls,
            "model_evaluations": trace.model_evaluations,
            **trace.model_dump(mode="json"),
        }
        return write_json(out / "trace.json", payload)
