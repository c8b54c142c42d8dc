// @vitest-environment jsdom
import { describe, expect, it, vi } from "vitest";
import { Composer, type ComposerParts } from "../src/composer.js";

function newComposer(onSend: (parts: ComposerParts) => void = () => {}) {
  const container = document.createElement("div");
  const composer = new Composer(container, {
    onSend,
    measureImage: async () => ({ width: 896, height: 448 }),
    thumbnailUrl: () => "blob:fake-thumb",
  });
  return { composer, container };
}

function typeText(composer: Composer, text: string): void {
  composer.textArea.value = text;
  composer.textArea.dispatchEvent(new Event("input"));
}

describe("Composer", () => {
  it("send is disabled while the composer is empty", () => {
    const { composer } = newComposer();
    expect(composer.sendButton.disabled).toBe(true);
    typeText(composer, "   ");
    expect(composer.sendButton.disabled).toBe(true);
    typeText(composer, "hello");
    expect(composer.sendButton.disabled).toBe(false);
  });

  it("image attachment shows a thumbnail and a token estimate before send", async () => {
    const { composer, container } = newComposer();
    await composer.addImage(new File(["x"], "wide.png", { type: "image/png" }));
    const thumb = container.querySelector("img.thumbnail")!;
    expect(thumb.getAttribute("src")).toBe("blob:fake-thumb");
    const estimate = container.querySelector(".token-estimate")!;
    // 896x448 tiles as 2x1 plus thumbnail: 3 tiles at 64 tokens.
    expect(estimate.getAttribute("data-token-estimate")).toBe("192");
    expect(composer.sendButton.disabled).toBe(false);
  });

  it("submit delivers the parts and clears the composer", async () => {
    const onSend = vi.fn();
    const { composer } = newComposer(onSend);
    typeText(composer, "look at this");
    await composer.addImage(new File(["x"], "a.png", { type: "image/png" }));
    composer.element.dispatchEvent(new Event("submit"));
    expect(onSend).toHaveBeenCalledOnce();
    const parts = onSend.mock.calls[0][0] as ComposerParts;
    expect(parts.text).toBe("look at this");
    expect(parts.images.length).toBe(1);
    expect(composer.sendButton.disabled).toBe(true);
    expect(composer.textArea.value).toBe("");
  });

  it("submit on an empty composer is a no-op", () => {
    const onSend = vi.fn();
    const { composer } = newComposer(onSend);
    composer.element.dispatchEvent(new Event("submit"));
    expect(onSend).not.toHaveBeenCalled();
  });
});
