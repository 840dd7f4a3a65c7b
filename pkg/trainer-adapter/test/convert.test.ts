import { readFileSync } from 'node:fs';
import { dirname, join } from 'node:path';
import { fileURLToPath } from 'node:url';
import { describe, expect, it } from 'vitest';
import { convertDataset, parseInstructionLine } from '../src/convert.js';

const here = dirname(fileURLToPath(import.meta.url));
const fixture = readFileSync(join(here, 'fixtures', 'instructions.jsonl'), 'utf8');

const fixtureRecords = fixture
  .split('\n')
  .filter((l) => l.trim())
  .map((l) => JSON.parse(l) as { id: string; task: string; image: string; prompt: string; gold: string });

describe('convertDataset', () => {
  it('preserves record counts per task', () => {
    const det = convertDataset(fixture, 'etsgp');
    const arg = convertDataset(fixture, 'arsgp');
    expect(det.length).toBe(fixtureRecords.filter((r) => r.task === 'etsgp').length);
    expect(arg.length).toBe(fixtureRecords.filter((r) => r.task === 'arsgp').length);
    expect(det.length + arg.length).toBe(20);
  });

  it('carries prompt and gold into the two turns byte-exactly', () => {
    for (const task of ['etsgp', 'arsgp'] as const) {
      const conversations = convertDataset(fixture, task);
      const source = fixtureRecords.filter((r) => r.task === task);
      expect(conversations.map((c) => c.id)).toEqual(source.map((r) => r.id));
      conversations.forEach((conv, i) => {
        expect(conv.image).toBe(source[i].image);
        expect(conv.messages[0]).toEqual({ role: 'user', content: source[i].prompt });
        expect(conv.messages[1]).toEqual({ role: 'assistant', content: source[i].gold });
      });
    }
  });

  it('ignores blank lines', () => {
    const padded = '\n' + fixture + '\n\n';
    expect(convertDataset(padded, 'etsgp').length).toBe(6);
  });

  it('aborts on an invalid record, naming it by id', () => {
    const bad = JSON.stringify({ id: 'x:etsgp', task: 'etsgp', image: 'i.jpg', prompt: 'p', meta: { event_type: 'Conflict.Attack' } });
    expect(() => convertDataset(bad, 'etsgp')).toThrow(/x:etsgp.*gold/);
  });

  it('aborts on malformed JSON with the line number', () => {
    expect(() => convertDataset('{not json', 'etsgp')).toThrow(/line 1/);
  });
});

describe('parseInstructionLine', () => {
  it('requires a role on argument records', () => {
    const rec = { id: 'y:arsgp:Place', task: 'arsgp', image: '', prompt: 'p', gold: 'g', meta: { event_type: 'Contact.Meet' } };
    expect(() => parseInstructionLine(JSON.stringify(rec), 1)).toThrow(/meta\.role/);
  });

  it('rejects unknown tasks', () => {
    const rec = { id: 'z', task: 'grounding', image: '', prompt: 'p', gold: 'g', meta: { event_type: 'Life.Die' } };
    expect(() => parseInstructionLine(JSON.stringify(rec), 1)).toThrow(/invalid task/);
  });
});
