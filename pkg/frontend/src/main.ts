#!/usr/bin/env node
import { hideBin } from "yargs/helpers";
import { run } from "./cli.js";

process.exit(run(hideBin(process.argv)));
