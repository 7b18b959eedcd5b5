"""Thirteen reference ground-truth derivations for replay testing."""

DERIVATIONS = {
    13: [
        r"W{(P_{e})} = \log{(P_{e})}",
        r"\frac{d}{d P_{e}} W{(P_{e})} = \frac{d}{d P_{e}} \log{(P_{e})}",
        r"\frac{d}{d P_{e}} W{(P_{e})} = \frac{1}{P_{e}}",
        r"\frac{d}{d P_{e}} \log{(P_{e})} = \frac{1}{P_{e}}",
        r"\int \frac{d}{d P_{e}} \log{(P_{e})} dP_{e} = \int \frac{1}{P_{e}} dP_{e}",
    ],
    14: [
        r"\phi{(x^\prime)} = \int \log{(x^\prime)} dx^\prime",
        r"\frac{d}{d x^\prime} \phi{(x^\prime)} = \frac{d}{d x^\prime} \int \log{(x^\prime)} dx^\prime",
        r"\frac{d}{d x^\prime} \phi{(x^\prime)} = \frac{\partial}{\partial x^\prime} (n_{2} + x^\prime \log{(x^\prime)} - x^\prime)",
        r"\operatorname{t_{1}}{(x^\prime,n_{2})} = \frac{\partial}{\partial x^\prime} (n_{2} + x^\prime \log{(x^\prime)} - x^\prime)",
        r"\operatorname{t_{1}}{(x^\prime,n_{2})} = \frac{d}{d x^\prime} \phi{(x^\prime)}",
        r"\operatorname{t_{1}}{(x^\prime,n_{2})} e^{- \frac{d}{d x^\prime} \phi{(x^\prime)}} = e^{- \frac{d}{d x^\prime} \phi{(x^\prime)}} \frac{d}{d x^\prime} \phi{(x^\prime)}",
    ],
    15: [
        r"C{(\phi_2)} = \log{(\phi_2)}",
        r"2 C{(\phi_2)} = C{(\phi_2)} + \log{(\phi_2)}",
        r"\frac{d}{d \phi_2} 2 C{(\phi_2)} = \frac{d}{d \phi_2} (C{(\phi_2)} + \log{(\phi_2)})",
        r"2 \frac{d}{d \phi_2} C{(\phi_2)} = \frac{d}{d \phi_2} C{(\phi_2)} + \frac{1}{\phi_2}",
        r"2 \frac{d}{d \phi_2} \log{(\phi_2)} = \frac{d}{d \phi_2} \log{(\phi_2)} + \frac{1}{\phi_2}",
        r"4 (\frac{d}{d \phi_2} \log{(\phi_2)})^{2} = (\frac{d}{d \phi_2} \log{(\phi_2)} + \frac{1}{\phi_2})^{2}",
    ],
    16: [
        r"\operatorname{v_{t}}{(t,\hat{X})} = \hat{X}^{t}",
        r"\frac{\partial}{\partial t} \operatorname{v_{t}}{(t,\hat{X})} = \frac{\partial}{\partial t} \hat{X}^{t}",
        r"\hat{X} + \frac{\partial}{\partial t} \operatorname{v_{t}}{(t,\hat{X})} = \hat{X} + \frac{\partial}{\partial t} \hat{X}^{t}",
        r"\hat{X} + \frac{\partial}{\partial t} \operatorname{v_{t}}{(t,\hat{X})} = \hat{X} + \hat{X}^{t} \log{(\hat{X})}",
        r"\hat{X} + \frac{\partial}{\partial t} \operatorname{v_{t}}{(t,\hat{X})} = \hat{X} + \operatorname{v_{t}}{(t,\hat{X})} \log{(\hat{X})}",
        r"\hat{X} + \frac{\partial}{\partial t} \hat{X}^{t} = \hat{X} + \hat{X}^{t} \log{(\hat{X})}",
    ],
    17: [
        r"y{(A_{x})} = \frac{1}{A_{x}}",
        r"\int y{(A_{x})} dA_{x} = \int \frac{1}{A_{x}} dA_{x}",
        r"\int y{(A_{x})} dA_{x} = \varepsilon_0 + \log{(A_{x})}",
        r"\int \frac{1}{A_{x}} dA_{x} = \varepsilon_0 + \log{(A_{x})}",
        r"\int \frac{1}{A_{x}} dA_{x} - \frac{x}{A_{x}} = \varepsilon_0 + \log{(A_{x})} - \frac{x}{A_{x}}",
        r"\frac{\partial}{\partial x} (\int \frac{1}{A_{x}} dA_{x} - \frac{x}{A_{x}}) = \frac{\partial}{\partial x} (\varepsilon_0 + \log{(A_{x})} - \frac{x}{A_{x}})",
    ],
    18: [
        r"u{(\lambda)} = \sin{(\lambda)}",
        r"\int u{(\lambda)} d\lambda = \int \sin{(\lambda)} d\lambda",
        r"\int u{(\lambda)} d\lambda = n - \cos{(\lambda)}",
        r"\int \sin{(\lambda)} d\lambda = n - \cos{(\lambda)}",
        r"- \frac{\int \sin{(\lambda)} d\lambda}{\cos{(\lambda)}} = - \frac{n - \cos{(\lambda)}}{\cos{(\lambda)}}",
    ],
    19: [
        r"J{(\phi_1)} = \sin{(\phi_1)}",
        r"\frac{d}{d \phi_1} J{(\phi_1)} = \frac{d}{d \phi_1} \sin{(\phi_1)}",
        r"\sin{(\phi_1)} \frac{d}{d \phi_1} J{(\phi_1)} = \sin{(\phi_1)} \frac{d}{d \phi_1} \sin{(\phi_1)}",
        r"\sin{(\phi_1)} \frac{d}{d \phi_1} J{(\phi_1)} = \sin{(\phi_1)} \cos{(\phi_1)}",
        r"\sin{(\phi_1)} \frac{d}{d \phi_1} \sin{(\phi_1)} = \sin{(\phi_1)} \cos{(\phi_1)}",
        r"J{(\phi_1)} \frac{d}{d \phi_1} J{(\phi_1)} = J{(\phi_1)} \cos{(\phi_1)}",
    ],
    20: [
        r"\operatorname{f^{\prime}}{(\mathbf{J}_f)} = \frac{d}{d \mathbf{J}_f} \sin{(\mathbf{J}_f)}",
        r"\operatorname{f^{\prime}}{(\mathbf{J}_f)} = \cos{(\mathbf{J}_f)}",
        r"\operatorname{f^{\prime}}{(\mathbf{J}_f)} \sin{(\mathbf{J}_f)} = \sin{(\mathbf{J}_f)} \frac{d}{d \mathbf{J}_f} \sin{(\mathbf{J}_f)}",
        r"\cos{(\mathbf{J}_f)} = \frac{d}{d \mathbf{J}_f} \sin{(\mathbf{J}_f)}",
        r"\operatorname{f^{\prime}}{(\mathbf{J}_f)} \sin{(\mathbf{J}_f)} = \sin{(\mathbf{J}_f)} \cos{(\mathbf{J}_f)}",
    ],
    21: [
        r"\mathbb{I}{(\Psi_{\lambda})} = e^{\Psi_{\lambda}}",
        r"\int \mathbb{I}{(\Psi_{\lambda})} d\Psi_{\lambda} = \int e^{\Psi_{\lambda}} d\Psi_{\lambda}",
        r"\Psi_{\lambda} + \int \mathbb{I}{(\Psi_{\lambda})} d\Psi_{\lambda} = \Psi_{\lambda} + \int e^{\Psi_{\lambda}} d\Psi_{\lambda}",
        r"\Psi_{\lambda} + \int \mathbb{I}{(\Psi_{\lambda})} d\Psi_{\lambda} = \Psi_{\lambda} + \chi + e^{\Psi_{\lambda}}",
        r"\Psi_{\lambda} + \int \mathbb{I}{(\Psi_{\lambda})} d\Psi_{\lambda} = \Psi_{\lambda} + \chi + \mathbb{I}{(\Psi_{\lambda})}",
    ],
    22: [
        r"\operatorname{y^{\prime}}{(\mathbf{s})} = \log{(\mathbf{s})}",
        r"\int \operatorname{y^{\prime}}{(\mathbf{s})} d\mathbf{s} = \int \log{(\mathbf{s})} d\mathbf{s}",
        r"\int \operatorname{y^{\prime}}{(\mathbf{s})} d\mathbf{s} = \mathbf{s} \log{(\mathbf{s})} - \mathbf{s} + \omega",
        r"a{(\mathbf{s})} = \operatorname{y^{\prime}}{(\mathbf{s})} - \int \operatorname{y^{\prime}}{(\mathbf{s})} d\mathbf{s}",
        r"a{(\mathbf{s})} = - \mathbf{s} \log{(\mathbf{s})} + \mathbf{s} - \omega + \operatorname{y^{\prime}}{(\mathbf{s})}",
    ],
    23: [
        r"\operatorname{A_{z}}{(F_{N})} = \sin{(F_{N})}",
        r"\int \operatorname{A_{z}}{(F_{N})} dF_{N} = \int \sin{(F_{N})} dF_{N}",
        r"\mathbf{v}{(F_{N})} = (\int \operatorname{A_{z}}{(F_{N})} dF_{N})^{2}",
        r"\mathbf{v}{(F_{N})} = (\int \sin{(F_{N})} dF_{N})^{2}",
        r"\mathbf{v}{(F_{N})} = (Q - \cos{(F_{N})})^{2}",
        r"(\int \operatorname{A_{z}}{(F_{N})} dF_{N})^{2} = (\int \sin{(F_{N})} dF_{N})^{2}",
        r"(\int \operatorname{A_{z}}{(F_{N})} dF_{N})^{2} = (Q - \cos{(F_{N})})^{2}",
        r"(\int \sin{(F_{N})} dF_{N})^{2} = (Q - \cos{(F_{N})})^{2}",
    ],
    24: [
        r"\operatorname{f^{\prime}}{(\varepsilon_0)} = \sin{(\varepsilon_0)}",
        r"0 = - \operatorname{f^{\prime}}{(\varepsilon_0)} + \sin{(\varepsilon_0)}",
        r"\frac{d}{d \varepsilon_0} 0 = \frac{d}{d \varepsilon_0} (- \operatorname{f^{\prime}}{(\varepsilon_0)} + \sin{(\varepsilon_0)})",
        r"0 = \cos{(\varepsilon_0)} - \frac{d}{d \varepsilon_0} \operatorname{f^{\prime}}{(\varepsilon_0)}",
        r"\int 0 d\varepsilon_0 = \int (\cos{(\varepsilon_0)} - \frac{d}{d \varepsilon_0} \operatorname{f^{\prime}}{(\varepsilon_0)}) d\varepsilon_0",
    ],
    25: [
        r"y{(W,q,B)} = W + \frac{q}{B}",
        r"0 = W - y{(W,q,B)} + \frac{q}{B}",
        r"\frac{d}{d q} 0 = \frac{\partial}{\partial q} (W - y{(W,q,B)} + \frac{q}{B})",
        r"0 = - \frac{\partial}{\partial q} y{(W,q,B)} + \frac{1}{B}",
        r"0 = - \frac{\partial}{\partial q} (W + \frac{q}{B}) + \frac{1}{B}",
    ],
}
