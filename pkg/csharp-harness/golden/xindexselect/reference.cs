using System.Text;

public static class xIndexSelectUtil
{
    public static string xIndexSelect(int[] y, string x)
    {
        var sb = new StringBuilder();
        foreach (int i in y) sb.Append(x[i - 1]);
        return sb.ToString();
    }
}
