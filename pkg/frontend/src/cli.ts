/**
 * Figure CLI.
 *
 * Usage:
 *   node dist/cli.js <probe-sweep|surface|profile-family|decay-fit>
 *        --out FILE.svg [--title T] [--xlabel X] [--ylabel Y]
 *        [--fit summary.json] [--width N] [--height N] input.csv [...]
 */

import { SchemaError } from "./csv.js";
import { FigureKind, FigureSpec } from "./figures.js";
import { render } from "./render.js";

const KINDS: FigureKind[] = ["probe-sweep", "surface", "profile-family", "decay-fit"];

export function parseArgs(argv: string[]): FigureSpec {
  if (argv.length === 0) {
    throw new Error(`usage: <${KINDS.join("|")}> --out FILE.svg inputs...`);
  }
  const kind = argv[0] as FigureKind;
  if (!KINDS.includes(kind)) {
    throw new Error(`unknown figure kind '${argv[0]}'; choose from ${KINDS.join(", ")}`);
  }
  const spec: FigureSpec = { kind, inputs: [], output: "" };
  for (let i = 1; i < argv.length; i++) {
    const arg = argv[i];
    const next = () => {
      if (i + 1 >= argv.length) throw new Error(`${arg} needs a value`);
      return argv[++i];
    };
    switch (arg) {
      case "--out":
        spec.output = next();
        break;
      case "--title":
        spec.title = next();
        break;
      case "--xlabel":
        spec.xLabel = next();
        break;
      case "--ylabel":
        spec.yLabel = next();
        break;
      case "--fit":
        spec.fitSummary = next();
        break;
      case "--width":
        spec.width = Number(next());
        break;
      case "--height":
        spec.height = Number(next());
        break;
      default:
        if (arg.startsWith("--")) throw new Error(`unknown option ${arg}`);
        spec.inputs.push(arg);
    }
  }
  if (!spec.output) throw new Error("--out is required");
  if (spec.inputs.length === 0) throw new Error("at least one input CSV is required");
  return spec;
}

export function main(argv: string[]): number {
  try {
    const spec = parseArgs(argv);
    const path = render(spec);
    console.log(`wrote ${path}`);
    return 0;
  } catch (err) {
    if (err instanceof SchemaError) {
      console.error(`schema error: ${err.message}`);
    } else {
      console.error(`error: ${(err as Error).message}`);
    }
    return 1;
  }
}

if (process.argv[1] && /cli\.(js|ts)$/.test(process.argv[1])) {
  process.exit(main(process.argv.slice(2)));
}
