/** One-line status strip: errors stay until replaced, info fades on clear. */

export type BannerKind = "info" | "error" | "busy";

export interface Banner {
  el: HTMLElement;
  show(kind: BannerKind, text: string): void;
  clear(): void;
}

export function createBanner(): Banner {
  const el = document.createElement("div");
  el.className = "banner banner-empty";
  return {
    el,
    show(kind, text) {
      el.className = `banner banner-${kind}`;
      el.textContent = text;
    },
    clear() {
      el.className = "banner banner-empty";
      el.textContent = "";
    },
  };
}
