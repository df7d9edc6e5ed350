/**
 * Decision-tree wizard state. States are immutable: advance/back return new
 * objects, so a failed submission can never corrupt the walk, and the
 * answer trail serializes to localStorage as a list of option indices.
 */

import { canonical, CODE_BITS } from "./codec.js";
import type { TreeNode } from "./types.js";

export interface Answer {
  question: string;
  label: string;
  bits: string;
  index: number;
}

export interface WizardState {
  clipId: string;
  root: TreeNode;
  /** Current question, or null once a leaf was taken. */
  node: TreeNode | null;
  answers: Answer[];
}

export interface PersistedWizard {
  clipId: string;
  indices: number[];
}

export class IllegalChoiceError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "IllegalChoiceError";
  }
}

export function startWizard(root: TreeNode, clipId: string): WizardState {
  return { clipId, root, node: root, answers: [] };
}

export function advance(state: WizardState, optionIndex: number): WizardState {
  if (state.node === null) {
    throw new IllegalChoiceError("wizard is already complete");
  }
  const option = state.node.options[optionIndex];
  if (option === undefined) {
    throw new IllegalChoiceError(
      `option ${optionIndex} is not valid for "${state.node.question}"`,
    );
  }
  const answers = [
    ...state.answers,
    {
      question: state.node.question,
      label: option.label,
      bits: option.bits,
      index: optionIndex,
    },
  ];
  return {
    ...state,
    node: option.leaf ? null : option.next ?? null,
    answers,
  };
}

/** Drop the latest answer; downstream answers are already gone by design. */
export function back(state: WizardState): WizardState {
  if (state.answers.length === 0) {
    return state;
  }
  return restore(state.root, {
    clipId: state.clipId,
    indices: state.answers.slice(0, -1).map((a) => a.index),
  });
}

export function assembledBits(state: WizardState): string {
  return state.answers.map((a) => a.bits).join("");
}

export function isComplete(state: WizardState): boolean {
  return state.node === null;
}

/** Canonical code once complete; validated with the same rules as the server. */
export function completedCode(state: WizardState): string | null {
  if (!isComplete(state)) {
    return null;
  }
  const bits = assembledBits(state);
  if (bits.length !== CODE_BITS) {
    throw new IllegalChoiceError(`walk assembled ${bits.length} bits, expected ${CODE_BITS}`);
  }
  return canonical(bits);
}

export function serialize(state: WizardState): PersistedWizard {
  return { clipId: state.clipId, indices: state.answers.map((a) => a.index) };
}

/** Replay persisted answers through the tree, validating each choice. */
export function restore(root: TreeNode, persisted: PersistedWizard): WizardState {
  let state = startWizard(root, persisted.clipId);
  for (const index of persisted.indices) {
    state = advance(state, index);
  }
  return state;
}
