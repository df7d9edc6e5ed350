/**
 * Browser app: pick a clip, walk the taxonomy questions, preview the
 * assembled code with its verb hints, and submit to the service.
 *
 * Wizard state is persisted to localStorage per clip, so a refresh
 * mid-annotation restores the walk; failed submissions keep the state.
 */

import { ApiClient, ApiError, NetworkError, withRetry } from "./api.js";
import type { ManifestClip, TreeNode } from "./types.js";
import {
  advance,
  assembledBits,
  back,
  completedCode,
  isComplete,
  restore,
  serialize,
  startWizard,
  WizardState,
} from "./wizard.js";

const client = new ApiClient("");

let tree: TreeNode;
let clips: ManifestClip[] = [];
let state: WizardState | null = null;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function storageKey(clipId: string): string {
  return `motioncodes-wizard:${clipId}`;
}

function persist(): void {
  if (state) {
    localStorage.setItem(storageKey(state.clipId), JSON.stringify(serialize(state)));
  }
}

function clearPersisted(clipId: string): void {
  localStorage.removeItem(storageKey(clipId));
}

function loadState(clipId: string): WizardState {
  const raw = localStorage.getItem(storageKey(clipId));
  if (raw) {
    try {
      return restore(tree, JSON.parse(raw));
    } catch {
      clearPersisted(clipId); // stale persisted walk for an older tree
    }
  }
  return startWizard(tree, clipId);
}

function setStatus(text: string, isError = false, retry?: () => void): void {
  const status = el<HTMLDivElement>("status");
  status.textContent = text;
  status.className = isError ? "status error" : "status";
  if (retry) {
    const button = document.createElement("button");
    button.textContent = "retry";
    button.onclick = retry;
    status.appendChild(button);
  }
}

function renderClipList(): void {
  const list = el<HTMLUListElement>("clip-list");
  list.replaceChildren();
  for (const clip of clips) {
    const item = document.createElement("li");
    const button = document.createElement("button");
    button.textContent = `${clip.annotated ? "[done] " : ""}${clip.id}`;
    button.disabled = state?.clipId === clip.id;
    button.onclick = () => selectClip(clip.id);
    item.appendChild(button);
    list.appendChild(item);
  }
}

function renderClip(clip: ManifestClip): void {
  const holder = el<HTMLDivElement>("clip-view");
  holder.replaceChildren();
  const title = document.createElement("h3");
  title.textContent = clip.id + (clip.verb ? ` - ${clip.verb}` : "") + (clip.noun ? ` (${clip.noun})` : "");
  holder.appendChild(title);
  if (/\.(mp4|webm|mov|ogg)$/i.test(clip.uri)) {
    const video = document.createElement("video");
    video.src = clip.uri;
    video.controls = true;
    holder.appendChild(video);
  } else {
    const link = document.createElement("a");
    link.href = clip.uri;
    link.textContent = clip.uri;
    link.target = "_blank";
    holder.appendChild(link);
  }
}

async function renderWizard(): Promise<void> {
  if (!state) return;
  persist();
  const crumb = el<HTMLDivElement>("breadcrumb");
  crumb.textContent = state.answers.map((a) => a.label).join(" > ") || "(start)";
  const bits = el<HTMLDivElement>("bits");
  bits.textContent = `bits so far: ${assembledBits(state) || "(none)"}`;

  const question = el<HTMLDivElement>("question");
  const submitRow = el<HTMLDivElement>("submit-row");
  question.replaceChildren();
  submitRow.replaceChildren();

  const backButton = document.createElement("button");
  backButton.textContent = "back";
  backButton.disabled = state.answers.length === 0;
  backButton.onclick = () => {
    state = state && back(state);
    void renderWizard();
  };
  question.appendChild(backButton);

  if (!isComplete(state)) {
    const node = state.node!;
    const heading = document.createElement("h3");
    heading.textContent = node.question;
    question.appendChild(heading);
    if (node.help) {
      const help = document.createElement("p");
      help.className = "help";
      help.textContent = node.help;
      question.appendChild(help);
    }
    node.options.forEach((option, index) => {
      const button = document.createElement("button");
      button.textContent = `${option.label} [${option.bits}]`;
      button.onclick = () => {
        state = state && advance(state, index);
        void renderWizard();
      };
      question.appendChild(button);
    });
    return;
  }

  const code = completedCode(state)!;
  const heading = document.createElement("h3");
  heading.textContent = `code: ${code}`;
  question.appendChild(heading);
  try {
    const verbs = await withRetry(() => client.getVerbs(code));
    const hints = document.createElement("p");
    hints.textContent = verbs.length
      ? `verb hints: ${verbs.join(", ")}`
      : "no verbs listed for this code";
    question.appendChild(hints);
  } catch {
    // hints are best-effort
  }

  const overwrite = document.createElement("input");
  overwrite.type = "checkbox";
  overwrite.id = "overwrite";
  const overwriteLabel = document.createElement("label");
  overwriteLabel.htmlFor = "overwrite";
  overwriteLabel.textContent = "overwrite existing annotation";
  const submit = document.createElement("button");
  submit.textContent = "submit annotation";
  submit.onclick = () => void submitAnnotation(code, overwrite.checked);
  submitRow.append(submit, overwrite, overwriteLabel);
}

async function submitAnnotation(code: string, overwrite: boolean): Promise<void> {
  if (!state) return;
  const clipId = state.clipId;
  const body = { clip_id: clipId, code, annotator: annotatorName() };
  try {
    await client.postAnnotation(body, overwrite);
  } catch (err) {
    if (err instanceof ApiError) {
      // surface the server message; wizard state stays intact
      setStatus(`${err.code}: ${err.message}`, true);
    } else if (err instanceof NetworkError) {
      setStatus("network failure; annotation not sent", true, () =>
        void submitAnnotation(code, overwrite),
      );
    } else {
      throw err;
    }
    return;
  }
  setStatus(`stored ${code} for ${clipId}`);
  clearPersisted(clipId);
  await refreshManifest();
  const next = clips.find((c) => !c.annotated);
  if (next) {
    selectClip(next.id);
  } else {
    setStatus("all clips annotated");
    state = null;
  }
}

function annotatorName(): string {
  return el<HTMLInputElement>("annotator").value.trim() || "anonymous";
}

function selectClip(clipId: string): void {
  const clip = clips.find((c) => c.id === clipId);
  if (!clip) return;
  state = loadState(clipId);
  renderClip(clip);
  renderClipList();
  void renderWizard();
}

async function refreshManifest(): Promise<void> {
  clips = await withRetry(() => client.getManifest());
  renderClipList();
}

async function boot(): Promise<void> {
  try {
    tree = await withRetry(() => client.getTaxonomy());
    await refreshManifest();
  } catch (err) {
    setStatus(`cannot reach annotation service: ${String(err)}`, true, () => void boot());
    return;
  }
  const first = clips.find((c) => !c.annotated) ?? clips[0];
  if (first) {
    selectClip(first.id);
  } else {
    setStatus("manifest has no clips");
  }
}

if (typeof document !== "undefined") {
  void boot();
}
