// Offline 3D viewer for mapper-scope graph.json exports.
//
// The module is inlined into exported HTML next to the embedded graph-data
// JSON payload. Everything above the bootstrap section is DOM-free and pure
// so it can be unit-tested in node; the bootstrap at the bottom only runs
// when a document with embedded graph data is present.
// ----- Schema validation -----------------------------------------------------
export function validateGraph(doc) {
    const problems = [];
    const d = doc;
    if (!d || typeof d !== "object")
        return ["document is not an object"];
    if (!d.meta || typeof d.meta !== "object")
        problems.push("meta: missing");
    const colorColumns = d.meta && Array.isArray(d.meta.colors) ? d.meta.colors : null;
    if (!colorColumns || colorColumns.length === 0) {
        problems.push("meta.colors: expected a non-empty list of color columns");
    }
    if (!Array.isArray(d.nodes)) {
        problems.push("nodes: expected a list");
    }
    else {
        d.nodes.forEach((node, i) => {
            if (!node || typeof node !== "object") {
                problems.push(`nodes[${i}]: not an object`);
                return;
            }
            if (!Array.isArray(node.pos) || node.pos.length !== 3 || node.pos.some((v) => typeof v !== "number" || !isFinite(v))) {
                problems.push(`nodes[${i}].pos: expected three finite numbers`);
            }
            if (!node.colors || typeof node.colors !== "object") {
                problems.push(`nodes[${i}].colors: missing`);
            }
            else if (colorColumns) {
                for (const column of colorColumns) {
                    if (typeof node.colors[column] !== "number") {
                        problems.push(`nodes[${i}].colors.${column}: missing value`);
                        break;
                    }
                }
            }
        });
    }
    if (!Array.isArray(d.edges)) {
        problems.push("edges: expected a list");
    }
    else {
        const count = Array.isArray(d.nodes) ? d.nodes.length : 0;
        d.edges.forEach((edge, i) => {
            if (!edge || typeof edge.a !== "number" || typeof edge.b !== "number") {
                problems.push(`edges[${i}]: expected numeric endpoints`);
            }
            else if (edge.a < 0 || edge.a >= count || edge.b < 0 || edge.b >= count) {
                problems.push(`edges[${i}]: endpoint out of range`);
            }
        });
    }
    return problems;
}
// ----- Colormap ----------------------------------------------------------------
// Viridis control points (perceptually uniform), sampled at t = 0, 1/8, ... 1.
export const COLORMAP_STOPS = [
    [68, 1, 84],
    [70, 50, 127],
    [54, 92, 141],
    [39, 127, 143],
    [31, 161, 136],
    [74, 194, 109],
    [159, 218, 58],
    [216, 226, 25],
    [253, 231, 37],
];
export function sampleColormap(t) {
    const clamped = Math.max(0, Math.min(1, t));
    const scaled = clamped * (COLORMAP_STOPS.length - 1);
    const low = Math.floor(scaled);
    const high = Math.min(low + 1, COLORMAP_STOPS.length - 1);
    const frac = scaled - low;
    const a = COLORMAP_STOPS[low];
    const b = COLORMAP_STOPS[high];
    return [
        Math.round(a[0] + (b[0] - a[0]) * frac),
        Math.round(a[1] + (b[1] - a[1]) * frac),
        Math.round(a[2] + (b[2] - a[2]) * frac),
    ];
}
export function cssColor(rgb) {
    return `rgb(${rgb[0]},${rgb[1]},${rgb[2]})`;
}
export function colorBounds(doc, column) {
    let min = Infinity;
    let max = -Infinity;
    for (const node of doc.nodes) {
        const value = node.colors[column];
        if (value < min)
            min = value;
        if (value > max)
            max = value;
    }
    if (!isFinite(min))
        return [0, 1];
    return [min, max];
}
export function initialState(doc, column) {
    var _a;
    const requested = column !== null && column !== void 0 ? column : (_a = doc.viewer) === null || _a === void 0 ? void 0 : _a.initial_color;
    const active = requested && doc.meta.colors.includes(requested) ? requested : doc.meta.colors[0];
    return {
        yaw: 0.6,
        pitch: 0.35,
        zoom: 1.0,
        activeColor: active,
        hoveredNode: null,
        scaleBounds: colorBounds(doc, active),
    };
}
export function switchColor(doc, state, column, warn = (m) => console.warn(m)) {
    if (!doc.meta.colors.includes(column)) {
        warn(`unknown color column ${column}; keeping ${state.activeColor}`);
        return state;
    }
    return { ...state, activeColor: column, scaleBounds: colorBounds(doc, column) };
}
export function nodeColorCss(state, node) {
    const [min, max] = state.scaleBounds;
    const value = node.colors[state.activeColor];
    const t = max > min ? (value - min) / (max - min) : 0.5;
    return cssColor(sampleColormap(t));
}
export function projectAll(doc, state, width, height) {
    const count = doc.nodes.length;
    if (count === 0)
        return [];
    let cx = 0;
    let cy = 0;
    let cz = 0;
    for (const node of doc.nodes) {
        cx += node.pos[0];
        cy += node.pos[1];
        cz += node.pos[2];
    }
    cx /= count;
    cy /= count;
    cz /= count;
    const cosYaw = Math.cos(state.yaw);
    const sinYaw = Math.sin(state.yaw);
    const cosPitch = Math.cos(state.pitch);
    const sinPitch = Math.sin(state.pitch);
    const rotated = doc.nodes.map((node) => {
        const x = node.pos[0] - cx;
        const y = node.pos[1] - cy;
        const z = node.pos[2] - cz;
        const rx = cosYaw * x + sinYaw * z;
        const rz = -sinYaw * x + cosYaw * z;
        const ry = cosPitch * y - sinPitch * rz;
        const rd = sinPitch * y + cosPitch * rz;
        return { id: node.id, rx, ry, rd };
    });
    let radius = 0;
    for (const p of rotated) {
        radius = Math.max(radius, Math.abs(p.rx), Math.abs(p.ry));
    }
    const scale = (state.zoom * 0.45 * Math.min(width, height)) / Math.max(radius, 1e-9);
    const nodeRadius = Math.max(2.5, Math.min(9, 90 / Math.sqrt(count)));
    return rotated.map((p) => ({
        id: p.id,
        x: width / 2 + p.rx * scale,
        y: height / 2 - p.ry * scale,
        depth: p.rd,
        radius: nodeRadius,
    }));
}
export function pickNode(projected, x, y, slop = 3) {
    let best = null;
    for (const p of projected) {
        const dx = p.x - x;
        const dy = p.y - y;
        if (dx * dx + dy * dy > (p.radius + slop) * (p.radius + slop))
            continue;
        if (!best || p.depth > best.depth)
            best = p;
    }
    return best ? best.id : null;
}
export function render(doc, state, ctx, width, height) {
    const projected = projectAll(doc, state, width, height);
    const byId = new Map(projected.map((p) => [p.id, p]));
    ctx.fillStyle = "#101014";
    ctx.clearRect(0, 0, width, height);
    ctx.fillRect(0, 0, width, height);
    ctx.strokeStyle = "#8a8a96";
    ctx.lineWidth = 1;
    ctx.globalAlpha = 0.35;
    ctx.beginPath();
    for (const edge of doc.edges) {
        const a = byId.get(edge.a);
        const b = byId.get(edge.b);
        if (!a || !b)
            continue;
        ctx.moveTo(a.x, a.y);
        ctx.lineTo(b.x, b.y);
    }
    ctx.stroke();
    ctx.globalAlpha = 1.0;
    // Painter's order: far nodes first, ties broken by id for determinism.
    const order = [...projected].sort((p, q) => p.depth - q.depth || p.id - q.id);
    for (const p of order) {
        ctx.beginPath();
        ctx.arc(p.x, p.y, p.radius, 0, Math.PI * 2);
        ctx.fillStyle = nodeColorCss(state, doc.nodes[p.id]);
        ctx.fill();
        if (state.hoveredNode === p.id) {
            ctx.beginPath();
            ctx.arc(p.x, p.y, p.radius + 2.5, 0, Math.PI * 2);
            ctx.strokeStyle = "#ffffff";
            ctx.lineWidth = 1.5;
            ctx.stroke();
        }
    }
    return projected;
}
export function colorOptions(doc) {
    return [...doc.meta.colors];
}
export function tooltipLines(doc, nodeId) {
    const node = doc.nodes[nodeId];
    if (!node)
        return [`node ${nodeId}: not in graph`];
    const lines = [`node ${node.id} (${node.members.length} rows)`];
    if (node.dominant_region !== undefined && node.purity !== undefined) {
        lines.push(`dominant region ${node.dominant_region}, purity ${node.purity.toFixed(2)}`);
    }
    const parts = Object.entries(node.composition)
        .sort((a, b) => b[1] - a[1])
        .slice(0, 4)
        .map(([fips, rows]) => `${fips}:${rows}`);
    if (parts.length)
        lines.push(`composition ${parts.join(" ")}`);
    if (node.time_range)
        lines.push(`time ${node.time_range[0]}..${node.time_range[1]}`);
    for (const [column, value] of Object.entries(node.colors)) {
        lines.push(`${column} = ${Number(value.toPrecision(6))}`);
    }
    return lines;
}
export function flareNodeIds(doc) {
    var _a, _b, _c;
    const items = (_c = (_b = (_a = doc.analysis) === null || _a === void 0 ? void 0 : _a.flares) === null || _b === void 0 ? void 0 : _b.items) !== null && _c !== void 0 ? _c : [];
    return items.flatMap((f) => f.nodes);
}
export function initViewer(doc, mount) {
    const problems = validateGraph(doc);
    if (problems.length) {
        const panel = document.createElement("div");
        panel.id = "error";
        panel.textContent = "graph data failed validation:\n" + problems.join("\n");
        mount.appendChild(panel);
        throw new Error(problems[0]);
    }
    const canvas = document.createElement("canvas");
    mount.appendChild(canvas);
    const hud = document.createElement("div");
    hud.id = "hud";
    mount.appendChild(hud);
    const tooltip = document.createElement("div");
    tooltip.id = "tooltip";
    mount.appendChild(tooltip);
    const label = document.createElement("label");
    label.textContent = "color by";
    const select = document.createElement("select");
    for (const column of colorOptions(doc)) {
        const option = document.createElement("option");
        option.value = column;
        option.textContent = column;
        select.appendChild(option);
    }
    label.appendChild(select);
    hud.appendChild(label);
    const legend = document.createElement("div");
    legend.className = "legend";
    legend.style.background = `linear-gradient(to right, ${COLORMAP_STOPS.map(cssColor).join(",")})`;
    const legendLabels = document.createElement("div");
    legendLabels.className = "legend-labels";
    hud.appendChild(legend);
    hud.appendChild(legendLabels);
    const info = document.createElement("div");
    info.textContent = `${doc.nodes.length} nodes, ${doc.edges.length} edges (drag to rotate, wheel to zoom)`;
    hud.appendChild(info);
    let state = initialState(doc);
    select.value = state.activeColor;
    let projected = [];
    function resize() {
        canvas.width = mount.clientWidth || 960;
        canvas.height = mount.clientHeight || 640;
    }
    function legendText() {
        const [min, max] = state.scaleBounds;
        legendLabels.textContent = "";
        for (const value of [min, (min + max) / 2, max]) {
            const span = document.createElement("span");
            span.textContent = String(Number(value.toPrecision(4)));
            legendLabels.appendChild(span);
        }
    }
    const ctx = canvas.getContext("2d");
    function renderNow() {
        projected = render(doc, state, ctx, canvas.width, canvas.height);
    }
    function setColor(column) {
        state = switchColor(doc, state, column);
        select.value = state.activeColor;
        legendText();
        renderNow();
    }
    select.addEventListener("change", () => setColor(select.value));
    let dragging = false;
    let lastX = 0;
    let lastY = 0;
    canvas.addEventListener("mousedown", (event) => {
        dragging = true;
        lastX = event.clientX;
        lastY = event.clientY;
    });
    window.addEventListener("mouseup", () => {
        dragging = false;
    });
    canvas.addEventListener("mousemove", (event) => {
        const rect = canvas.getBoundingClientRect();
        if (dragging) {
            state = {
                ...state,
                yaw: state.yaw + (event.clientX - lastX) * 0.008,
                pitch: Math.max(-1.5, Math.min(1.5, state.pitch + (event.clientY - lastY) * 0.008)),
            };
            lastX = event.clientX;
            lastY = event.clientY;
            renderNow();
            return;
        }
        const hovered = pickNode(projected, event.clientX - rect.left, event.clientY - rect.top);
        if (hovered !== state.hoveredNode) {
            state = { ...state, hoveredNode: hovered };
            renderNow();
        }
        if (hovered !== null) {
            tooltip.style.display = "block";
            tooltip.style.left = `${event.clientX - rect.left + 14}px`;
            tooltip.style.top = `${event.clientY - rect.top + 14}px`;
            tooltip.textContent = tooltipLines(doc, hovered).join("\n");
            tooltip.style.whiteSpace = "pre";
        }
        else {
            tooltip.style.display = "none";
        }
    });
    canvas.addEventListener("wheel", (event) => {
        event.preventDefault();
        const factor = Math.exp(-event.deltaY * 0.001);
        state = { ...state, zoom: Math.max(0.1, Math.min(20, state.zoom * factor)) };
        renderNow();
    });
    window.addEventListener("resize", () => {
        resize();
        renderNow();
    });
    resize();
    legendText();
    renderNow();
    return {
        get state() {
            return state;
        },
        setColor,
        renderNow,
    };
}
function bootstrap() {
    const payload = document.getElementById("graph-data");
    const mount = document.getElementById("app");
    if (!payload || !mount)
        return;
    let doc;
    try {
        doc = JSON.parse(payload.textContent || "");
    }
    catch (error) {
        const panel = document.createElement("div");
        panel.id = "error";
        panel.textContent = `failed to parse embedded graph JSON: ${error}`;
        mount.appendChild(panel);
        return;
    }
    try {
        initViewer(doc, mount);
    }
    catch {
        // validation problems are already on screen
    }
}
if (typeof document !== "undefined" && document.getElementById("graph-data")) {
    bootstrap();
}
