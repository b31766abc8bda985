import { writeFileSync } from "node:fs";
import yargs from "yargs";
import { RefusalError, SchemaError } from "./errors.js";
import { renderFigure } from "./figures.js";
import { loadSpec } from "./schema.js";

export function run(argv: string[]): number {
  let exitCode = 0;
  yargs(argv)
    .scriptName("figures")
    .command(
      "render <spec>",
      "render a figure spec to an SVG file",
      (y) =>
        y
          .positional("spec", { type: "string", demandOption: true })
          .option("out", { type: "string", describe: "output path (overrides the spec)" }),
      (args) => {
        try {
          const spec = loadSpec(args.spec as string);
          const out = (args.out as string | undefined) ?? spec.out;
          if (!out) {
            throw new SchemaError("no output path: pass --out or set 'out' in the spec");
          }
          const svg = renderFigure(spec, args.spec as string);
          writeFileSync(out, svg);
          console.log(`wrote ${out}`);
        } catch (err) {
          if (err instanceof SchemaError) {
            console.error(`schema error: ${err.message}`);
            exitCode = 2;
          } else if (err instanceof RefusalError) {
            console.error(`refused: ${err.message}`);
            exitCode = 3;
          } else if (err instanceof Error && "code" in err && err.code === "ENOENT") {
            console.error(`schema error: ${err.message}`);
            exitCode = 2;
          } else {
            throw err;
          }
        }
      },
    )
    .demandCommand(1)
    .strict()
    .fail((msg) => {
      console.error(msg);
      exitCode = 2;
    })
    .parseSync();
  return exitCode;
}

