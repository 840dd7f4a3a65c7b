/**
 * Command line entry points:
 *
 *   node dist/cli.js convert <instructions.jsonl> <task> <out.jsonl>
 *   node dist/cli.js config <task> <out.yaml>
 *   node dist/cli.js retriever-config <out.yaml>
 */

import { readFileSync, writeFileSync, mkdirSync } from 'node:fs';
import { dirname } from 'node:path';
import { buildTuningConfig, configToYaml, retrieverConfigYaml, type TuningTask } from './config.js';
import { convertDataset } from './convert.js';

function requireTask(value: string): TuningTask {
  if (value !== 'etsgp' && value !== 'arsgp') {
    throw new Error(`task must be etsgp or arsgp, got: ${value}`);
  }
  return value;
}

function writeOut(path: string, content: string): void {
  mkdirSync(dirname(path), { recursive: true });
  writeFileSync(path, content);
}

export function run(argv: string[]): number {
  const [command, ...rest] = argv;
  try {
    switch (command) {
      case 'convert': {
        const [input, task, out] = rest;
        if (!input || !task || !out) {
          console.error('usage: convert <instructions.jsonl> <etsgp|arsgp> <out.jsonl>');
          return 1;
        }
        const conversations = convertDataset(readFileSync(input, 'utf8'), requireTask(task));
        writeOut(out, conversations.map((c) => JSON.stringify(c)).join('\n') + '\n');
        console.log(`wrote ${conversations.length} conversations to ${out}`);
        return 0;
      }
      case 'config': {
        const [task, out] = rest;
        if (!task || !out) {
          console.error('usage: config <etsgp|arsgp> <out.yaml>');
          return 1;
        }
        writeOut(out, configToYaml(buildTuningConfig(requireTask(task))));
        console.log(`wrote tuning config to ${out}`);
        return 0;
      }
      case 'retriever-config': {
        const [out] = rest;
        if (!out) {
          console.error('usage: retriever-config <out.yaml>');
          return 1;
        }
        writeOut(out, retrieverConfigYaml());
        console.log(`wrote retriever config to ${out}`);
        return 0;
      }
      default:
        console.error('commands: convert, config, retriever-config');
        return 1;
    }
  } catch (err) {
    console.error((err as Error).message);
    return 2;
  }
}

if (process.argv[1] && process.argv[1].endsWith('cli.js')) {
  process.exit(run(process.argv.slice(2)));
}
