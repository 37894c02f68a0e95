import numpy as np

from app.command.base import BaseCommand, CommandResult, write_json
from app.config import RunConfig
from app.logger import logger
from app.oracle import write_histogram_csv
from app.quadrature import write_rows_csv
from app.verification import Verifier, histogram_of_model


class VerifyCommand(BaseCommand):
    name: str = "verify"
    description: str = (
        "Run the oracle suite at the configured design and write a pass/fail "
        "report; exits nonzero when any check fails."
    )

    async def execute(self, config: RunConfig) -> CommandResult:
        flow = self.build_flow(config)
        s = np.asarray(config.model.design, dtype=float)
        out = config.output_dir
        verifier = Verifier(flow=flow, settings=config.verify, seed=config.seed)

        report = await verifier.run(s)
        sensitivity = verifier.sensitivity(s)
        header = ["node"] + [f"ds_{k + 1}" for k in range(s.shape[0])]
        histogram = histogram_of_model(
            flow, s, config.verify.mc_samples, config.verify.histogram_bins, config.seed
        )
        files = [
            write_json(out / "verify_report.json", report.payload()),
            write_rows_csv(out / "sensitivity.csv", header, sensitivity.rows()),
            write_histogram_csv(out / "histogram.csv", histogram),
        ]

        failures = [check.name for check in report.failures]
        if failures:
            logger.warning(f"verify: {len(failures)} checks failed: {failures}")
        else:
            logger.info(f"verify: all {len(report.checks)} checks passed")
        return CommandResult(
            output={"passed": report.passed, "failures": failures},
            files=files,
            exit_code=0 if report.passed else 1,
        )
