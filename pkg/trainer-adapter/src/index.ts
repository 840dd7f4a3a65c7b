export {
  type TuningTask,
  type TuningConfig,
  buildTuningConfig,
  configToYaml,
  retrieverConfigYaml,
} from './config.js';
export {
  type InstructionRecord,
  type Conversation,
  parseInstructionLine,
  convertDataset,
} from './convert.js';
