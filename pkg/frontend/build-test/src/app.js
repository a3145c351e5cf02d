// DOM shell around the view-model. The client keeps no business state:
// every mutation posts one tailoring action and re-renders from the
// server's confirmed response, and all validation text shown comes from
// the service's issue list.
import { ApiClient, ServiceError } from "./api.js";
import { buildTree, treeFingerprint } from "./tree.js";
import { MIGRATION_TYPE_LABELS, canSubmit, emptyWizard, submitWizard, toggle } from "./wizard.js";
const api = new ApiClient("");
const state = {
    catalog: [],
    issues: [],
    wizard: emptyWizard(),
    banners: [],
};
function el(tag, attrs = {}, ...children) {
    const node = document.createElement(tag);
    for (const [key, value] of Object.entries(attrs)) {
        if (key === "class")
            node.className = value;
        else
            node.setAttribute(key, value);
    }
    node.append(...children);
    return node;
}
function banner(kind, text) {
    state.banners.push({ kind, text });
    render();
}
async function perform(work) {
    try {
        return await work();
    }
    catch (err) {
        if (err instanceof ServiceError) {
            const subjects = err.subjects.length ? ` [${err.subjects.join(", ")}]` : "";
            banner("error", `${err.code}: ${err.message}${subjects}`);
        }
        else {
            banner("error", String(err));
        }
        return undefined;
    }
}
function adopt(response) {
    state.method = response.method;
    state.issues = response.issues;
    render();
}
async function refreshMethod() {
    if (!state.method)
        return;
    const fresh = await perform(() => api.getMethod(state.method.id));
    if (fresh)
        adopt(fresh);
}
async function act(action) {
    if (!state.method)
        return;
    const response = await perform(() => api.applyAction(state.method.id, action));
    if (response) {
        adopt(response);
    }
    else {
        // Action failed: roll the view back to confirmed server state.
        await refreshMethod();
    }
}
// --- rendering -------------------------------------------------------------
function render() {
    const root = document.getElementById("app");
    if (!root)
        return;
    root.replaceChildren(renderBanners(), renderSidebar(), renderMain());
}
function renderBanners() {
    const host = el("div", { class: "banners" });
    state.banners.forEach((entry, index) => {
        const dismiss = el("button", { class: "dismiss" }, "×");
        dismiss.onclick = () => {
            state.banners.splice(index, 1);
            render();
        };
        host.append(el("div", { class: `banner ${entry.kind}` }, entry.text, dismiss));
    });
    return host;
}
function renderSidebar() {
    const side = el("aside", { class: "sidebar" });
    side.append(el("h1", {}, "Reengineering workbench"));
    side.append(renderWizard());
    side.append(renderMethodList());
    return side;
}
function renderWizard() {
    const wizard = state.wizard;
    const box = el("section", { class: "wizard" }, el("h2", {}, "New method"));
    const name = el("input", {
        type: "text",
        placeholder: "Method name",
        value: wizard.name,
    });
    name.oninput = () => {
        wizard.name = name.value;
        submit.disabled = !canSubmit(wizard);
    };
    const description = el("textarea", { placeholder: "Description (optional)", rows: "2" });
    description.value = wizard.description;
    description.oninput = () => {
        wizard.description = description.value;
    };
    box.append(el("label", {}, "Name"), name, el("label", {}, "Description"), description);
    box.append(el("label", {}, "Migration types"));
    const typeList = el("div", { class: "check-list" });
    Object.keys(MIGRATION_TYPE_LABELS).forEach((mt) => {
        const check = el("input", { type: "checkbox" });
        check.checked = wizard.types.has(mt);
        check.onchange = () => {
            wizard.types = toggle(wizard.types, mt);
            submit.disabled = !canSubmit(wizard);
        };
        typeList.append(el("label", { class: "check" }, check, MIGRATION_TYPE_LABELS[mt]));
    });
    box.append(typeList);
    box.append(el("label", {}, "Phases"));
    const phaseList = el("div", { class: "check-list" });
    state.catalog
        .filter((f) => f.kind === "phase")
        .forEach((phase) => {
        const check = el("input", { type: "checkbox" });
        check.checked = wizard.phases.has(phase.id);
        check.onchange = () => {
            wizard.phases = toggle(wizard.phases, phase.id);
            submit.disabled = !canSubmit(wizard);
        };
        phaseList.append(el("label", { class: "check" }, check, phase.name));
    });
    box.append(phaseList);
    const submit = el("button", { class: "primary" }, "Create method");
    submit.disabled = !canSubmit(wizard);
    submit.onclick = async () => {
        const response = await perform(() => submitWizard(api, wizard));
        if (response) {
            state.wizard = emptyWizard();
            state.selected = undefined;
            adopt(response);
        }
    };
    box.append(submit);
    return box;
}
function renderMethodList() {
    const box = el("section", { class: "method-list" }, el("h2", {}, "Stored methods"));
    const list = el("ul", {});
    box.append(list);
    void perform(() => api.listMethods()).then((doc) => {
        if (!doc)
            return;
        list.replaceChildren(...doc.methods.map((entry) => {
            const link = el("a", { href: "#" }, `${entry.name} (${entry.migration_types.join(",")}, ${entry.fragment_count} fragments)`);
            link.onclick = async (event) => {
                event.preventDefault();
                const response = await perform(() => api.getMethod(entry.id));
                if (response) {
                    state.selected = undefined;
                    adopt(response);
                }
            };
            return el("li", {}, link);
        }));
    });
    return box;
}
function renderMain() {
    const main = el("main", { class: "main" });
    if (!state.method) {
        main.append(el("p", { class: "hint" }, "Create a method with the wizard or load a stored one."));
        return main;
    }
    const tree = buildTree(state.method, state.catalog, state.issues);
    main.append(renderMethodHeader(state.method));
    main.append(renderIssues(state.issues));
    const columns = el("div", { class: "columns" });
    columns.append(renderTree(tree));
    columns.append(renderDetail(tree));
    main.append(columns);
    main.append(renderSequences(tree));
    main.append(renderSharePanel());
    return main;
}
function renderMethodHeader(method) {
    return el("header", { class: "method-header" }, el("h2", {}, method.name), el("p", { class: "meta" }, `types ${method.migration_types.join(", ")} · phases ${method.phases.join(", ")} · ${method.members.length} fragments`));
}
function renderIssues(issues) {
    const host = el("div", { class: "issues" });
    for (const issue of issues) {
        host.append(el("div", { class: `issue ${issue.severity}` }, el("strong", {}, issue.code), ` ${issue.message}`));
    }
    return host;
}
function renderTree(tree) {
    const host = el("section", { class: "tree" }, el("h3", {}, "Method fragments"));
    for (const phase of tree.phases) {
        const addButton = el("button", { class: "small" }, "+ add fragment");
        addButton.onclick = () => addFragmentDialog(phase.id);
        const phaseHead = el("div", { class: "phase-head" }, el("h4", {}, phase.name), addButton);
        const list = el("ul", { class: "phase" });
        for (const node of phase.fragments) {
            list.append(renderNode(node));
        }
        host.append(phaseHead, list);
    }
    return host;
}
function renderNode(node) {
    const li = el("li", { class: node.waived ? "node waived" : "node" });
    const row = el("div", {
        class: state.selected === node.id ? "node-row selected" : "node-row",
        draggable: node.waived ? "false" : "true",
        "data-id": node.id,
    });
    row.onclick = (event) => {
        event.stopPropagation();
        state.selected = node.id;
        render();
    };
    row.ondragstart = (event) => {
        event.dataTransfer?.setData("text/fragment-id", node.id);
    };
    row.ondragover = (event) => event.preventDefault();
    row.ondrop = async (event) => {
        event.preventDefault();
        event.stopPropagation();
        const dragged = event.dataTransfer?.getData("text/fragment-id");
        if (dragged && dragged !== node.id) {
            await placeAfter(dragged, node.id);
        }
    };
    row.append(el("span", { class: `kind ${node.kind}` }, node.kind));
    row.append(el("span", { class: "name" }, node.name));
    if (node.badge) {
        const badge = el("span", { class: `badge ${node.badge}` }, node.badge);
        if (node.situationNotes.length) {
            badge.title = node.situationNotes.join("\n");
        }
        row.append(badge);
    }
    if (node.provenance === "user-defined") {
        row.append(el("span", { class: "badge user" }, "user"));
    }
    if (node.techniques.length) {
        row.append(el("span", { class: "badge techniques" }, `${node.techniques.length} techniques`));
    }
    if (node.overridden) {
        row.append(el("span", { class: "badge overridden" }, "edited"));
    }
    if (node.waived) {
        row.append(el("span", { class: "badge waived", title: node.waiverText ?? "" }, "waived"));
    }
    for (const warning of node.warnings) {
        row.append(el("span", { class: "inline-warning", title: warning }, "⚠"));
    }
    li.append(row);
    if (node.children.length) {
        const children = el("ul", { class: "children" });
        for (const child of node.children) {
            children.append(renderNode(child));
        }
        li.append(children);
    }
    return li;
}
function renderDetail(tree) {
    const host = el("section", { class: "detail" }, el("h3", {}, "Fragment"));
    const node = state.selected ? findNode(tree, state.selected) : undefined;
    if (!node) {
        host.append(el("p", { class: "hint" }, "Select a fragment in the tree."));
        return host;
    }
    host.append(el("h4", {}, node.name));
    host.append(el("p", { class: "meta" }, `${node.kind} · ${node.provenance}${node.waived ? " · waived" : ""}`));
    for (const note of node.situationNotes) {
        host.append(el("p", { class: "situation" }, note));
    }
    const definition = el("textarea", { rows: "6" });
    definition.value = node.definition;
    host.append(el("label", {}, "Definition"), definition);
    const saveDef = el("button", { class: "small" }, "Save definition");
    saveDef.onclick = () => act({ op: "edit-definition", fragment: node.id, definition: definition.value });
    host.append(saveDef);
    if (!node.waived) {
        const extend = el("button", { class: "small" }, "Extend…");
        extend.onclick = () => {
            const name = window.prompt(`Name of the new ${node.kind} extending "${node.name}"`);
            if (name)
                void act({ op: "extend-fragment", parent: node.id, name, definition: "" });
        };
        const remove = el("button", { class: "small danger" }, "Remove…");
        remove.onclick = () => {
            let waiver;
            if (node.badge === "mandatory") {
                waiver =
                    window.prompt("This fragment is mandatory for the selected types. Waiver justification (leave empty to remove without one):") ??
                        undefined;
                if (waiver === "")
                    waiver = undefined;
            }
            void act({ op: "remove-fragment", fragment: node.id, ...(waiver ? { waiver } : {}) });
        };
        host.append(el("div", { class: "actions" }, extend, remove));
    }
    if (node.kind === "task" && !node.waived) {
        host.append(el("label", {}, "Techniques"));
        const bound = el("ul", { class: "techniques" });
        for (const technique of node.techniques) {
            const unbind = el("button", { class: "tiny" }, "unbind");
            unbind.onclick = () => act({ op: "unbind-technique", task: node.id, technique });
            bound.append(el("li", {}, technique, " ", unbind));
        }
        host.append(bound);
        const picker = el("select", {});
        picker.append(el("option", { value: "" }, "bind a technique…"));
        state.catalog
            .filter((f) => f.kind === "technique")
            .forEach((technique) => picker.append(el("option", { value: technique.id }, technique.name)));
        picker.onchange = () => {
            if (picker.value)
                void act({ op: "bind-technique", task: node.id, technique: picker.value });
        };
        host.append(picker);
    }
    return host;
}
function renderSequences(tree) {
    const host = el("section", { class: "sequences" }, el("h3", {}, "Sequences"));
    host.append(el("p", { class: "hint" }, "Drag one fragment onto another to place it after that fragment."));
    const list = el("ul", {});
    tree.edges.forEach((edge, index) => {
        const item = el("li", {}, `${edge.from} → ${edge.to}`);
        if (edge.warning) {
            item.append(el("span", { class: "inline-warning", title: edge.warning }, ` ⚠ ${edge.warning}`));
            item.className = "warned";
        }
        const drop = el("button", { class: "tiny" }, "delete");
        drop.onclick = () => {
            if (!state.method)
                return;
            const edges = state.method.sequences.filter((_, i) => i !== index);
            void act({ op: "set-sequence", edges });
        };
        item.append(" ", drop);
        list.append(item);
    });
    host.append(list);
    return host;
}
function renderSharePanel() {
    const host = el("section", { class: "share" }, el("h3", {}, "Share"));
    const download = el("button", { class: "small" }, "Download XML");
    download.onclick = async () => {
        if (!state.method)
            return;
        const xml = await perform(() => api.exportXml(state.method.id));
        if (xml === undefined)
            return;
        const blob = new Blob([xml], { type: "application/xml" });
        const link = el("a", {
            href: URL.createObjectURL(blob),
            download: `${state.method.id}.xml`,
        });
        link.click();
        URL.revokeObjectURL(link.href);
    };
    const fileInput = el("input", { type: "file", accept: ".xml,application/xml" });
    fileInput.onchange = async () => {
        const file = fileInput.files?.[0];
        if (!file)
            return;
        const text = await file.text();
        const before = state.method
            ? treeFingerprint(buildTree(state.method, state.catalog, state.issues))
            : undefined;
        const response = await perform(() => api.importXml(text));
        if (response) {
            adopt(response);
            const after = treeFingerprint(buildTree(response.method, state.catalog, response.issues));
            if (before !== undefined && before === after) {
                banner("info", "Imported method matches the current tree.");
            }
        }
    };
    host.append(download, el("label", { class: "import" }, "Import XML: ", fileInput));
    return host;
}
// --- interactions ----------------------------------------------------------
async function placeAfter(dragged, target) {
    if (!state.method)
        return;
    // Reordering supersedes whatever edge existed between the pair.
    const edges = state.method.sequences.filter((edge) => !(edge.from === target && edge.to === dragged) &&
        !(edge.from === dragged && edge.to === target));
    edges.push({ from: target, to: dragged });
    await act({ op: "set-sequence", edges });
}
function addFragmentDialog(phaseId) {
    const name = window.prompt(`Name of the new task in phase "${phaseId}"`);
    if (!name)
        return;
    void act({ op: "add-fragment", name, kind: "task", phase: phaseId, definition: "" });
}
function findNode(tree, id) {
    const walk = (nodes) => {
        for (const node of nodes) {
            if (node.id === id)
                return node;
            const hit = walk(node.children);
            if (hit)
                return hit;
        }
        return undefined;
    };
    for (const phase of tree.phases) {
        const hit = walk(phase.fragments);
        if (hit)
            return hit;
    }
    return undefined;
}
// --- boot --------------------------------------------------------------------
async function boot() {
    const doc = await perform(() => api.catalogFragments());
    if (doc) {
        state.catalog = doc.fragments;
    }
    render();
}
void boot();
