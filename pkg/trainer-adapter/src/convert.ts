/**
 * Instruction JSONL -> trainer-native conversation conversion.
 *
 * Input records come from the extraction pipeline's dataset emitter:
 *   { id, task: "etsgp"|"arsgp", image, prompt, gold, meta: { event_type, role? } }
 * Each record filtered by task becomes one two-turn conversation; the gold
 * answer is carried into the assistant turn byte-exactly.
 */

export interface InstructionRecord {
  id: string;
  task: 'etsgp' | 'arsgp';
  image: string;
  prompt: string;
  gold: string;
  meta: { event_type: string; role?: string };
}

export interface Conversation {
  id: string;
  image: string;
  messages: [
    { role: 'user'; content: string },
    { role: 'assistant'; content: string },
  ];
}

export function parseInstructionLine(line: string, lineNo: number): InstructionRecord {
  let raw: unknown;
  try {
    raw = JSON.parse(line);
  } catch (err) {
    throw new Error(`line ${lineNo}: not valid JSON (${(err as Error).message})`);
  }
  const rec = raw as Partial<InstructionRecord>;
  const id = typeof rec.id === 'string' && rec.id ? rec.id : null;
  if (!id) throw new Error(`line ${lineNo}: record has no id`);
  if (rec.task !== 'etsgp' && rec.task !== 'arsgp') {
    throw new Error(`record ${id}: invalid task ${String(rec.task)}`);
  }
  if (typeof rec.prompt !== 'string' || !rec.prompt) throw new Error(`record ${id}: missing prompt`);
  if (typeof rec.gold !== 'string' || !rec.gold) throw new Error(`record ${id}: missing gold`);
  if (typeof rec.image !== 'string') throw new Error(`record ${id}: missing image`);
  if (!rec.meta || typeof rec.meta.event_type !== 'string') {
    throw new Error(`record ${id}: missing meta.event_type`);
  }
  if (rec.task === 'arsgp' && typeof rec.meta.role !== 'string') {
    throw new Error(`record ${id}: argument record needs meta.role`);
  }
  return rec as InstructionRecord;
}

export function convertDataset(jsonl: string, task: 'etsgp' | 'arsgp'): Conversation[] {
  const conversations: Conversation[] = [];
  const lines = jsonl.split('\n');
  for (let i = 0; i < lines.length; i++) {
    const line = lines[i].trim();
    if (!line) continue;
    const record = parseInstructionLine(line, i + 1);
    if (record.task !== task) continue;
    conversations.push({
      id: record.id,
      image: record.image,
      messages: [
        { role: 'user', content: record.prompt },
        { role: 'assistant', content: record.gold },
      ],
    });
  }
  return conversations;
}
