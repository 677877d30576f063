/**
 * The five-point rating scale shown to experts. The descriptions are the
 * exact wording handed to the panel, with the criterion and the two
 * technologies substituted into the bracketed slots.
 */

export const RATING_MIN = 1;
export const RATING_MAX = 5;

export interface ScaleEntry {
  value: number;
  /** Short label for compact controls. */
  label: string;
  /** Full sentence with slots filled in. */
  describe: (criterion: string, subject: string, reference: string) => string;
}

export const SCALE: readonly ScaleEntry[] = [
  {
    value: 1,
    label: "equal",
    describe: (c, i, j) => `${c} of ${i} is equal to that of ${j}, but they are almost the same`,
  },
  {
    value: 2,
    label: "more",
    describe: (c, i, j) => `${c} of ${i} is more than that of ${j}, but they are almost the same`,
  },
  {
    value: 3,
    label: "slightly more",
    describe: (c, i, j) => `${c} of ${i} is slightly more than that of ${j}`,
  },
  {
    value: 4,
    label: "moderately more",
    describe: (c, i, j) => `${c} of ${i} is moderately more than that of ${j}`,
  },
  {
    value: 5,
    label: "exceedingly more",
    describe: (c, i, j) => `${c} of ${i} is exceedingly more than that of ${j}`,
  },
];

/** Every rating control funnels through this; out-of-scale input cannot
 * reach the wire. */
export function clampRating(value: number): number {
  if (!Number.isFinite(value)) return RATING_MIN;
  return Math.min(RATING_MAX, Math.max(RATING_MIN, Math.round(value)));
}

/** Criterion names for the fixed study design; sessions reference criteria
 * by id only. */
export const CRITERION_NAMES: Record<number, string> = {
  1: "capital investment",
  2: "capital replacement",
  3: "electricity",
  4: "operation and maintenance",
  5: "COD_t",
  6: "BOD5",
  7: "TSS",
  8: "NH4N",
  9: "TP",
  10: "HRT",
};

export function criterionName(id: number): string {
  return CRITERION_NAMES[id] ?? `criterion ${id}`;
}
