/**
 * Client-side mirror of the service's viewbox algebra.
 *
 * The arithmetic matches the server expression for expression (same IEEE-754
 * double operations), so applying a suggestion locally lands on exactly the
 * viewport the server's refine loop would produce. Conventions: normalized
 * coordinates, y grows downward, alpha positive rotates counter-clockwise
 * on screen, shift/zoom magnitudes are percent of the current view size,
 * rotation magnitudes are radians.
 */
export const KIND_ORDER = [
    "left", "right", "up", "down", "zoom_in", "zoom_out", "clockwise", "counter_clockwise",
];
export function isRotation(kind) {
    return kind === "clockwise" || kind === "counter_clockwise";
}
export function applyPerturbation(box, p) {
    return {
        cx: box.cx + box.w * p.ox,
        cy: box.cy + box.h * p.oy,
        w: box.w * (1.0 + p.oz),
        h: box.h * (1.0 + p.oz),
        alpha: box.alpha + p.oalpha,
    };
}
export function invertSingleAxis(p) {
    const nonzero = [p.ox, p.oy, p.oz, p.oalpha].filter((c) => c !== 0).length;
    if (nonzero > 1) {
        throw new Error("perturbation is not single-axis");
    }
    if (p.oz !== 0) {
        return { ox: 0, oy: 0, oz: 1.0 / (1.0 + p.oz) - 1.0, oalpha: 0 };
    }
    return { ox: -p.ox, oy: -p.oy, oz: 0, oalpha: -p.oalpha };
}
export function suggestionToPerturbation(s) {
    const zero = { ox: 0, oy: 0, oz: 0, oalpha: 0 };
    if (!s.adjust) {
        return zero;
    }
    const m = isRotation(s.kind) ? s.magnitude : s.magnitude / 100.0;
    switch (s.kind) {
        case "left": return { ...zero, ox: -m };
        case "right": return { ...zero, ox: m };
        case "up": return { ...zero, oy: -m };
        case "down": return { ...zero, oy: m };
        case "zoom_in": return { ...zero, oz: -m };
        case "zoom_out": return { ...zero, oz: m };
        case "clockwise": return { ...zero, oalpha: -m };
        case "counter_clockwise": return { ...zero, oalpha: m };
    }
}
export function applySuggestion(box, s) {
    return applyPerturbation(box, suggestionToPerturbation(s));
}
/** Corner positions (TL, TR, BR, BL of the unrotated box, rotated by alpha). */
export function boxCorners(box) {
    const ca = Math.cos(box.alpha);
    const sa = Math.sin(box.alpha);
    const hw = box.w / 2;
    const hh = box.h / 2;
    const locals = [[-hw, -hh], [hw, -hh], [hw, hh], [-hw, hh]];
    return locals.map(([vx, vy]) => [
        box.cx + ca * vx + sa * vy,
        box.cy - sa * vx + ca * vy,
    ]);
}
export function boxWithinImage(box) {
    return boxCorners(box).every(([x, y]) => x >= 0 && x <= 1 && y >= 0 && y <= 1);
}
export function sameViewBox(a, b, tol = 0) {
    const fields = ["cx", "cy", "w", "h", "alpha"];
    return fields.every((f) => Math.abs(a[f] - b[f]) <= tol);
}
