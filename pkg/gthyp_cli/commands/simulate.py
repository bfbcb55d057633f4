"""Run the best-design search for every scenario of a config file."""

import logging
from pathlib import Path

from gthyp.errors import ResourceError
from gthyp.harness import TABLE2_FIELDS, Table2Row, best_matrix_search

from ..config import load_simulation_config
from ..store import ResultStore, write_matrix

logger = logging.getLogger(__name__)


def register(cli):
    parser = cli.add_command("simulate", help="Best random designs per (N, rule); CSV table plus manifest")
    parser.add_argument("--config", required=True, help="key=value config file")
    parser.add_argument("--out", default="table2.csv", help="CSV name, relative to $GTHYP_OUTPUT_DIR")
    parser.add_argument("--save-matrices", action="store_true", help="Also write each best design")

    @cli.handler(parser)
    def simulate(args, settings):
        config = load_simulation_config(args.config)
        store = ResultStore(settings.output_dir)
        out = store.path(args.out)

        runs: list[dict] = []
        try:
            for scenario in config.scenarios(cap=settings.enumeration_cap):
                try:
                    result = best_matrix_search(scenario, threads=settings.threads)
                except ResourceError as e:
                    logger.warning(f"Skipping {scenario.rule} N={scenario.N} t={scenario.t}: {e}")
                    runs.append({"N": scenario.N, "t": scenario.t, "rule": scenario.rule, "error": str(e)})
                    continue

                row = Table2Row.from_result(result)
                store.append_rows(out, TABLE2_FIELDS, [row.as_row()])
                run = {
                    **dict(zip(TABLE2_FIELDS, row.as_row())),
                    "matrix_seed": result.seed,
                    "repetition": result.repetition,
                    "skipped": [{"w": s.weight, "reason": s.reason} for s in result.skipped],
                }
                if args.save_matrices:
                    name = f"{out.stem}_N{row.N}_{row.rule}.txt"
                    run["matrix_file"] = str(write_matrix(out.parent / name, result.best_matrix))
                runs.append(run)
                print(",".join(str(v) for v in row.as_row()))
        finally:
            store.write_manifest(
                out.with_suffix(".manifest.json"),
                {"config_path": str(Path(args.config)), **config.model_dump()},
                runs,
            )

        if runs and all("error" in run for run in runs):
            raise ResourceError("every scenario was skipped; see the manifest for reasons")
