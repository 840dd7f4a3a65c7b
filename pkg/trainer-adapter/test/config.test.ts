import { describe, expect, it } from 'vitest';
import { buildTuningConfig, configToYaml, retrieverConfigYaml } from '../src/config.js';

describe('buildTuningConfig', () => {
  it('pins the adapter hyperparameters exactly', () => {
    for (const task of ['etsgp', 'arsgp'] as const) {
      const cfg = buildTuningConfig(task);
      expect(cfg.adapterRank).toBe(128);
      expect(cfg.adapterAlpha).toBe(64);
      expect(cfg.epochs).toBe(15);
      expect(cfg.batchSize).toBe(96);
      expect(cfg.learningRate).toBe(2e-4);
      expect(cfg.optimizer).toBe('AdamW');
      expect(cfg.targetLayers).toBe('all-linear');
    }
  });

  it('keeps the two tasks in separate parameter sets', () => {
    const det = buildTuningConfig('etsgp');
    const arg = buildTuningConfig('arsgp');
    expect(det.outputDir).not.toBe(arg.outputDir);
    expect(det.outputDir).toContain('etsgp');
    expect(arg.outputDir).toContain('arsgp');
  });

  it('rejects unknown tasks', () => {
    expect(() => buildTuningConfig('both' as never)).toThrow(/unknown tuning task/);
  });
});

describe('configToYaml', () => {
  it('emits every field as a key/value line, unset fields as default', () => {
    const text = configToYaml(buildTuningConfig('etsgp'));
    expect(text).toContain('adapter_rank: 128\n');
    expect(text).toContain('adapter_alpha: 64\n');
    expect(text).toContain('epochs: 15\n');
    expect(text).toContain('batch_size: 96\n');
    expect(text).toContain('learning_rate: 0.0002\n');
    expect(text).toContain('optimizer: AdamW\n');
    expect(text).toContain('target_layers: all-linear\n');
    expect(text).toContain('warmup_ratio: default\n');
    expect(text).toContain('weight_decay: default\n');
    expect(text).toContain('max_seq_length: default\n');
  });

  it('is deterministic', () => {
    expect(configToYaml(buildTuningConfig('arsgp'))).toBe(configToYaml(buildTuningConfig('arsgp')));
  });
});

describe('retrieverConfigYaml', () => {
  it('states the contrastive objective and a corpus placeholder', () => {
    const text = retrieverConfigYaml();
    expect(text).toContain('objective: contrastive-image-text');
    expect(text).toContain('corpus_path: <');
    expect(retrieverConfigYaml()).toBe(text);
  });
});
