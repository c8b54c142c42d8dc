import { imageTokenEstimate } from "./preproc.js";

export interface ComposerParts {
  text: string;
  images: File[];
  audio: File | null;
}

export interface ComposerOptions {
  onSend: (parts: ComposerParts) => void;
  /** Resolves an image file to pixel dimensions; the browser default uses
   * createImageBitmap, tests inject known sizes. */
  measureImage?: (file: File) => Promise<{ width: number; height: number }>;
  /** Thumbnail URL factory; object URLs in the browser, stubs in tests. */
  thumbnailUrl?: (file: File) => string;
}

async function defaultMeasure(file: File): Promise<{ width: number; height: number }> {
  const bitmap = await createImageBitmap(file);
  const size = { width: bitmap.width, height: bitmap.height };
  bitmap.close();
  return size;
}

/**
 * The turn composer: text box, image/audio attachments with pre-send
 * thumbnails and token estimates. Send stays disabled while empty.
 */
export class Composer {
  readonly element: HTMLElement;
  readonly textArea: HTMLTextAreaElement;
  readonly sendButton: HTMLButtonElement;
  readonly previewList: HTMLElement;
  private images: File[] = [];
  private audio: File | null = null;

  constructor(
    container: HTMLElement,
    private readonly options: ComposerOptions,
  ) {
    const doc = container.ownerDocument;
    this.element = doc.createElement("form");
    this.element.className = "composer";
    this.textArea = doc.createElement("textarea");
    this.textArea.placeholder = "Type a message";
    this.previewList = doc.createElement("div");
    this.previewList.className = "attachment-previews";
    this.sendButton = doc.createElement("button");
    this.sendButton.type = "submit";
    this.sendButton.textContent = "Send";
    this.element.appendChild(this.textArea);
    this.element.appendChild(this.previewList);
    this.element.appendChild(this.sendButton);
    container.appendChild(this.element);

    this.textArea.addEventListener("input", () => this.refresh());
    this.element.addEventListener("submit", (ev) => {
      ev.preventDefault();
      if (this.isEmpty()) return;
      this.options.onSend({ text: this.textArea.value.trim(), images: this.images, audio: this.audio });
      this.clear();
    });
    this.refresh();
  }

  isEmpty(): boolean {
    return !this.textArea.value.trim() && this.images.length === 0 && this.audio === null;
  }

  refresh(): void {
    this.sendButton.disabled = this.isEmpty();
  }

  async addImage(file: File): Promise<void> {
    const doc = this.element.ownerDocument;
    const measure = this.options.measureImage ?? defaultMeasure;
    const { width, height } = await measure(file);
    this.images.push(file);

    const preview = doc.createElement("figure");
    preview.className = "attachment image";
    const thumbUrl = this.options.thumbnailUrl?.(file);
    if (thumbUrl) {
      const img = doc.createElement("img");
      img.className = "thumbnail";
      img.src = thumbUrl;
      preview.appendChild(img);
    }
    const cost = doc.createElement("figcaption");
    cost.className = "token-estimate";
    const tokens = imageTokenEstimate(width, height);
    cost.setAttribute("data-token-estimate", String(tokens));
    cost.textContent = `${width}×${height} ≈ ${tokens} tok`;
    preview.appendChild(cost);
    this.previewList.appendChild(preview);
    this.refresh();
  }

  addAudio(file: File): void {
    const doc = this.element.ownerDocument;
    this.audio = file;
    const preview = doc.createElement("figure");
    preview.className = "attachment audio";
    preview.textContent = file.name;
    this.previewList.appendChild(preview);
    this.refresh();
  }

  clear(): void {
    this.textArea.value = "";
    this.images = [];
    this.audio = null;
    this.previewList.textContent = "";
    this.refresh();
  }
}
