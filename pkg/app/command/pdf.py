import numpy as np

from app.command.base import BaseCommand, CommandResult, write_json
from app.config import RunConfig
from app.logger import logger
from app.matching.kde import KdeConfig, SampleResponses, kde_estimate
from app.matching.monotonic import pdf_sensitivity
from app.matching.monotonic_matcher import MonotonicMatcher
from app.oracle import mc_propagate
from app.quadrature import distance, write_density_csv, write_rows_csv


_PDF_DESCRIPTION = """\
Write the design pdf of a fixed design point on the quadrature grid, the target
pdf when one is configured, a sampled KDE for comparison and the D matrix.
"""


class PdfCommand(BaseCommand):
    name: str = "pdf"
    description: str = _PDF_DESCRIPTION

    async def execute(self, config: RunConfig) -> CommandResult:
        flow = self.build_flow(config)
        s = np.asarray(config.model.design, dtype=float)
        grid = await flow.prepare(s, require_target=False)
        out = config.output_dir
        files = []

        density = flow.initial_density()
        files.append(write_density_csv(out / "pdf.csv", density))
        mean, variance = density.moments()
        summary = {
            "design": s.tolist(),
            "matcher": flow.matcher.name,
            "grid": {
                "f_lower": grid.f_lower,
                "f_upper": grid.f_upper,
                "n_points": grid.n_points,
            },
            "integral": density.integral(),
            "mean": mean,
            "variance": variance,
        }

        if isinstance(flow.matcher, MonotonicMatcher):
            sur = flow.matcher.surrogate(flow.initial_states)
            summary.update(slope=sur.a, shift=sur.b)
            if config.pdf.sensitivity:
                sensitivity = pdf_sensitivity(sur, flow.matcher.uncertainty, grid)
                header = ["node"] + [f"ds_{k + 1}" for k in range(s.shape[0])]
                files.append(
                    write_rows_csv(out / "sensitivity.csv", header, sensitivity.rows())
                )

        if flow.target is not None:
            target = flow.target_vector
            files.append(write_density_csv(out / "target.csv", target))
            summary["distance"] = distance(target, density)

        if config.pdf.kde:
            samples = mc_propagate(
                flow.model,
                s,
                flow.matcher.uncertainty,
                config.pdf.kde_samples,
                config.seed,
            )
            estimate = kde_estimate(
                SampleResponses(values=samples),
                grid,
                KdeConfig(bandwidth=config.matcher.bandwidth),
            )
            files.append(write_density_csv(out / "kde.csv", estimate))
            discrepancy = np.sqrt(distance(density, estimate)) / density.l2_norm()
            summary["kde_relative_l2"] = float(discrepancy)
            logger.info(f"KDE vs design pdf: relative L2 discrepancy {discrepancy:.4%}")

        files.append(write_json(out / "pdf_summary.json", summary))
        logger.info(f"pdf: wrote {len(files)} files to {out}")
        return CommandResult(output=summary, files=files)
