/**
 * Fine-tuning configuration emission.
 *
 * The detection task and the argument task are tuned with separate adapter
 * parameter sets, so each task gets its own config file and output directory.
 * Values not pinned by the training recipe (warmup, weight decay, max
 * sequence length) are emitted explicitly as unset-with-default.
 */

export type TuningTask = 'etsgp' | 'arsgp';

export interface TuningConfig {
  task: TuningTask;
  adapterRank: number;
  adapterAlpha: number;
  epochs: number;
  batchSize: number;
  learningRate: number;
  optimizer: string;
  targetLayers: string;
  outputDir: string;
  warmupRatio: number | null;
  weightDecay: number | null;
  maxSeqLength: number | null;
}

export function buildTuningConfig(task: TuningTask): TuningConfig {
  if (task !== 'etsgp' && task !== 'arsgp') {
    throw new Error(`unknown tuning task: ${task}`);
  }
  return {
    task,
    adapterRank: 128,
    adapterAlpha: 64,
    epochs: 15,
    batchSize: 96,
    learningRate: 2e-4,
    optimizer: 'AdamW',
    targetLayers: 'all-linear',
    outputDir: `adapters/${task}`,
    warmupRatio: null,
    weightDecay: null,
    maxSeqLength: null,
  };
}

/** Render a config as YAML-style key/value lines (stable key order). */
export function configToYaml(config: TuningConfig): string {
  const lines = [
    `task: ${config.task}`,
    `adapter_rank: ${config.adapterRank}`,
    `adapter_alpha: ${config.adapterAlpha}`,
    `epochs: ${config.epochs}`,
    `batch_size: ${config.batchSize}`,
    `learning_rate: ${config.learningRate}`,
    `optimizer: ${config.optimizer}`,
    `target_layers: ${config.targetLayers}`,
    `output_dir: ${config.outputDir}`,
    `warmup_ratio: ${config.warmupRatio ?? 'default'}`,
    `weight_decay: ${config.weightDecay ?? 'default'}`,
    `max_seq_length: ${config.maxSeqLength ?? 'default'}`,
  ];
  return lines.join('\n') + '\n';
}

/**
 * Config stub for contrastive image-text fine-tuning of the retriever; the
 * corpus path is a placeholder the operator fills in before launching.
 */
export function retrieverConfigYaml(): string {
  return [
    'objective: contrastive-image-text',
    'corpus_path: <PATH-TO-NEWS-IMAGE-CAPTION-PAIRS>',
    'base_model: clip',
  ].join('\n') + '\n';
}
