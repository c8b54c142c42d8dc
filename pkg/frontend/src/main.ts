import { ApiClient } from "./api.js";
import { createWebAudioSink, GaplessAudioQueue } from "./audioQueue.js";
import { Composer } from "./composer.js";
import { renderBenchRun } from "./reportView.js";
import { renderTranscript } from "./sessionView.js";
import { TurnStreamCard } from "./streamView.js";

// Browser entry point. One active stream per tab; report views are read-only.

const api = new ApiClient("");
let sessionId: string | null = null;
let queue: GaplessAudioQueue | null = null;
let streaming = false;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

async function refreshTranscript(): Promise<void> {
  if (!sessionId) return;
  renderTranscript(el("transcript"), await api.getSession(sessionId));
}

async function sendTurn(parts: { text: string; images: File[]; audio: File | null }) {
  if (!sessionId || streaming) return;
  streaming = true;
  queue ??= new GaplessAudioQueue(createWebAudioSink());
  const card = new TurnStreamCard(el("live-stream"), {
    audioQueue: queue,
    tokenByToken: el<HTMLInputElement>("token-toggle").checked,
  });
  try {
    await api.postTurn(
      sessionId,
      { text: parts.text, images: parts.images, audio: parts.audio ?? undefined },
      (frame) => card.handleFrame(frame),
    );
  } finally {
    streaming = false;
  }
  await refreshTranscript();
}

async function init(): Promise<void> {
  const composer = new Composer(el("composer-root"), { onSend: (parts) => void sendTurn(parts) });
  el<HTMLInputElement>("image-input").addEventListener("change", (ev) => {
    const input = ev.target as HTMLInputElement;
    for (const file of input.files ?? []) void composer.addImage(file);
    input.value = "";
  });
  el<HTMLInputElement>("audio-input").addEventListener("change", (ev) => {
    const input = ev.target as HTMLInputElement;
    if (input.files?.[0]) composer.addAudio(input.files[0]);
    input.value = "";
  });
  el<HTMLButtonElement>("new-session").addEventListener("click", async () => {
    const created = await api.createSession();
    sessionId = created.id;
    el("session-label").textContent = `session ${created.id} · budget ${created.budget_tokens}`;
    el("live-stream").textContent = "";
    await refreshTranscript();
  });
  el<HTMLFormElement>("report-form").addEventListener("submit", async (ev) => {
    ev.preventDefault();
    const runId = el<HTMLInputElement>("run-id").value.trim();
    if (!runId) return;
    const view = el("report-view");
    const poll = async () => {
      const run = await api.getBenchRun(runId);
      renderBenchRun(view, run);
      if (run.status === "running") setTimeout(() => void poll(), 750);
    };
    await poll();
  });
}

void init();
